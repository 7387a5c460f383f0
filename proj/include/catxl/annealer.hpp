#ifndef CATXL_ANNEALER_HPP
#define CATXL_ANNEALER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "catxl/evaluator.hpp"

namespace catxl {

enum class MoveKind : std::uint8_t {
  adjust_grouping,
  add_remove_layer,
  split_join_layer,
  adjust_boundary,
  adjust_with_shift_above,
  adjust_subgroup_shift,
  adjust_reinstatements,
};
inline constexpr std::size_t kNumMoveKinds = 7;
const char* to_string(MoveKind kind);
MoveKind move_kind_from_string(const std::string& s);

struct MoveWeights {
  // Indexed by MoveKind. Fine adjustments get 4x the structural moves.
  std::array<double, kNumMoveKinds> weight{1.0, 1.0, 1.0, 4.0, 4.0, 4.0, 4.0};

  double& operator[](MoveKind k) { return weight[static_cast<std::size_t>(k)]; }
  double operator[](MoveKind k) const { return weight[static_cast<std::size_t>(k)]; }
  void validate() const;
};

struct StateSpaceBounds {
  // Allowed layer boundaries (attachments and tops), ascending.
  std::vector<Currency> boundary_grid;
  // Overrides keyed by peril name: a group containing that peril uses it.
  std::map<std::string, std::vector<Currency>> group_grids;
  std::size_t min_layers = 0;  // per tower
  std::size_t max_layers = 3;  // per tower
  std::uint32_t max_reinstatements = 2;
  Currency min_layer_size = 0.0;
  std::vector<Currency> shift_grid{0.0};
  // Admissible groupings for grouping switches; empty disables them.
  std::vector<PerilGrouping> groupings;
  bool allow_subgroups = false;

  // Sorts grids and checks that every boundary (with every shift) lies on
  // the store's grid of every peril. Throws ConfigError.
  void validate(const CumulativeLossStore& store);
  const std::vector<Currency>& grid_for(const PerilGroup& group,
                                        const std::vector<std::string>& peril_names) const;
  // Empty string when the contract is admissible, else the reason.
  std::string violation(const Contract& contract,
                        const std::vector<std::string>& peril_names) const;
};

// Bounds whose boundary grid is the set of thresholds shared by all perils.
StateSpaceBounds default_bounds(const CumulativeLossStore& store);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// One elementary change to a contract.
struct Move {
  MoveKind kind = MoveKind::adjust_boundary;
  int op = 0;
  GroupId group = 0;
  std::size_t index = 0;
  std::size_t index2 = 0;
  double value = 0.0;
  double value2 = 0.0;
  std::vector<PerilId> part;
};

// All legal moves of one kind from `contract`.
std::vector<Move> enumerate_moves(const Contract& contract, MoveKind kind,
                                  const StateSpaceBounds& bounds,
                                  const std::vector<std::string>& peril_names);
// Applies a move; the result is canonical.
Contract apply_move(const Contract& contract, const Move& move, const StateSpaceBounds& bounds,
                    const std::vector<std::string>& peril_names);
// True for moves that add a layer.
bool is_add_move(const Move& move);

struct Proposal {
  Contract contract;
  MoveKind kind;
};

// Samples a kind by weight, then a move of that kind uniformly (add moves get
// odds add_bias : 1 against removals). Kinds without legal moves are
// resampled; throws Error when no kind has a legal move.
Proposal propose(const Contract& current, const StateSpaceBounds& bounds,
                 const std::vector<std::string>& peril_names, const MoveWeights& weights,
                 Rng& rng, double add_bias = 1.0);

struct AnnealSchedule {
  double t_initial = 1.0;
  double t_final = 1e-3;
  std::size_t steps = 5000;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  double build_bias = 5.0;
  double initial_phase_fraction = 0.1;

  void validate() const;
  // (T_f / T_0)^(1 / k_max)
  double cooling_factor() const;
};

// T_k = T_0 (T_f / T_0)^(k / k_max)
double temperature(std::size_t k, const AnnealSchedule& schedule);
// Metropolis rule for maximization: accept with probability min(1, exp(delta / T)).
bool metropolis_accept(double delta, double temperature, Rng& rng);

struct TraceRow {
  std::size_t step = 0;
  double objective = 0.0;
  double temperature = 0.0;
  MoveKind move = MoveKind::adjust_boundary;
  bool accepted = false;
  std::size_t chain = 0;
  // Best feasible objective so far in this chain; -inf before the first.
  double best = -std::numeric_limits<double>::infinity();
};

struct SpacePoint {
  double tvar = 0.0;
  double profit = 0.0;
  bool feasible = false;
};

struct RankedContract {
  Contract contract;
  RiskReport report;
};

// Higher objective, then lower TVaR, then fewer layers, then key order.
bool ranks_before(const RankedContract& a, const RankedContract& b);

struct AnnealOptions {
  MoveWeights weights;
  std::size_t keep_best = 10;
  std::size_t space_every = 1;
  unsigned threads = 1;
  // Re-validate every visited contract against the bounds (test builds).
  bool check_invariants = false;
};

struct ChainOutput {
  std::vector<TraceRow> trace;
  std::vector<SpacePoint> space;
};

struct AnnealResult {
  std::vector<RankedContract> best;  // feasible only, ranked
  std::vector<ChainOutput> chains;
  CacheStats cache;
};

// Receives each chain's output in chain order as soon as it is available.
using ChainSink = std::function<void(std::size_t chain, const ChainOutput&)>;

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain);

// Runs `schedule.restarts` independent chains. Chain c starts from
// starts[c % starts.size()], or from the empty contract when `starts` is empty.
AnnealResult anneal(Evaluator& evaluator, const StateSpaceBounds& bounds,
                    const AnnealSchedule& schedule, const std::vector<Contract>& starts,
                    const AnnealOptions& options = {}, const ChainSink& sink = {});

}  // namespace catxl

#endif  // CATXL_ANNEALER_HPP
