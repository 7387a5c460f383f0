#ifndef CATXL_BNB_HPP
#define CATXL_BNB_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catxl/loss_store.hpp"
#include "catxl/synthetic.hpp"

namespace catxl {

// Simplified problem: one layer (A_g, L_g) per peril group, no
// reinstatements, expected-value pricing, a single risk constraint K <= K_max.
//
// All quantities used for pruning are integers in micro-currency units, so
// bound comparisons are exact and results do not depend on summation order.

enum class BnbRiskKind { tvar, aep };

inline constexpr double kUnitsPerCurrency = 1e6;
inline constexpr std::int64_t kNoProfit = std::numeric_limits<std::int64_t>::min();

std::int64_t to_units(double currency);
double from_units(std::int64_t units);

struct BnbConfig {
  std::size_t groups = 2;  // n
  std::size_t bits = 1;    // b
  double rho = 0.1;
  double p_attach = 0.1;
  BnbRiskKind risk = BnbRiskKind::tvar;
  double beta = 0.995;
  // Absolute threshold; unset means k_max_factor * K(gross).
  std::optional<double> k_max;
  double k_max_factor = 0.9;

  void validate() const;
};

struct BnbGroup {
  std::string name;
  Currency a_min = 0.0;
  Currency a_max = 0.0;
  Currency l_max = 0.0;
  std::vector<Currency> attachments;  // 2^b candidates
  std::vector<Currency> tops;         // [i * 2^b + j]: attachment i, limit j
  std::vector<std::vector<std::int64_t>> recovery;  // per candidate, per year
  std::vector<std::int64_t> profit;                 // per candidate: -rho * mean recovery
  std::vector<std::int64_t> star;  // minimum-risk layer (A^min, L^max), dominating every candidate
  // Interval edges of the binary searches: A^min + k (A^max - A^min) / 2^b and
  // k L^max / 2^b for k = 0 .. 2^b.
  std::vector<Currency> a_edges;
  std::vector<Currency> l_edges;
  // Recovery and profit of the layer (a_edges[i], l_edges[j]) at [i * (2^b + 1) + j].
  std::vector<std::vector<std::int64_t>> corner_recovery;
  std::vector<std::int64_t> corner_profit;

  Currency limit(std::size_t candidate) const {
    return tops[candidate] - attachments[candidate / attachments.size()];
  }
};

struct BnbProblem {
  std::size_t bits = 1;
  double rho = 0.1;
  BnbRiskKind risk = BnbRiskKind::tvar;
  double beta = 0.995;
  double k_max = std::numeric_limits<double>::infinity();
  std::int64_t k_max_units = std::numeric_limits<std::int64_t>::max();
  std::uint32_t years = 0;
  std::vector<std::int64_t> gross;  // yearly gross loss
  std::vector<BnbGroup> groups;

  std::size_t n() const { return groups.size(); }
  std::size_t side() const { return std::size_t{1} << bits; }
  std::size_t candidates() const { return side() * side(); }

  void set_k_max(double k);
  // Risk measure of a yearly net-loss vector, in currency.
  double risk_value(std::span<const std::int64_t> net) const;
  // K(net) <= K_max, decided exactly.
  bool feasible(std::span<const std::int64_t> net) const;
  // Monotone relaxation: true only if every net vector that is elementwise
  // >= `net` is infeasible.
  bool surely_infeasible(std::span<const std::int64_t> net) const;
  // Net loss of a full assignment (candidate index per group).
  std::vector<std::int64_t> net_loss(std::span<const std::size_t> assignment) const;
  std::int64_t profit(std::span<const std::size_t> assignment) const;
};

// Builds per-group candidates (interval midpoints), a store whose grids hold
// every candidate boundary, and the recovery tables. Each peril is a group.
BnbProblem make_bnb_problem(const EventLossTable& table, const BnbConfig& config);
BnbProblem make_synthetic_problem(const SyntheticSpec& spec, const BnbConfig& config);
// Uses an existing store: candidate boundaries are snapped to its grids.
BnbProblem make_store_problem(const CumulativeLossStore& store, const BnbConfig& config);

// -rho * mean_t min(L, E(A) - E(A + L)) for one peril.
Currency group_profit(const CumulativeLossStore& store, PerilId peril, Currency attachment,
                      Currency limit, double rho);

struct TreeStats {
  std::uint64_t nodes_visited = 0;  // final (full-problem) solve
  std::uint64_t nodes_pruned_by_profit = 0;
  std::uint64_t nodes_pruned_by_risk = 0;
  std::uint64_t cascade_nodes = 0;  // all suffix solves plus the final solve
  double exhaustive_leaf_count = 0.0;  // 4^(n b)
  double exhaustive_tree_nodes = 0.0;  // 2^(2 n b + 1) - 1
  double reduction_factor = 0.0;       // exhaustive_tree_nodes / nodes_visited
};

struct SuffixSolution {
  std::size_t start = 0;  // first group of the suffix
  std::int64_t pimax = kNoProfit;
  std::vector<std::size_t> assignment;  // candidate per suffix group
  std::uint64_t nodes = 0;
};

struct BnbResult {
  bool feasible = false;
  std::vector<std::size_t> assignment;  // candidate index per group
  std::int64_t objective_units = kNoProfit;
  double objective = 0.0;
  double risk = 0.0;      // K of the optimum, or of all-l* when infeasible
  double min_risk = 0.0;  // K with every group at l*
  std::vector<SuffixSolution> suffixes;  // start = n-1 down to 1
  TreeStats stats;
};

BnbResult solve_cascade(const BnbProblem& problem);

// Reference solver with the per-node conditioned profit bound; tiny
// instances only (n <= 4, n b <= 8). nodes_visited counts top-level nodes.
BnbResult recursive_bound_solve(const BnbProblem& problem);

// Exhaustive enumeration of all 4^(n b) leaves.
BnbResult brute_force_solve(const BnbProblem& problem);

struct CensusRow {
  std::size_t n = 0;
  std::size_t b = 0;
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::uint64_t nodes_visited = 0;
  std::uint64_t cascade_nodes = 0;
  double reduction_factor = 0.0;
  bool feasible = false;
  double seconds = 0.0;
};

struct CensusFit {
  double c1 = 0.0;  // log4(nodes) ~ c1 * b n + c0
  double c0 = 0.0;
};

struct CensusConfig {
  std::vector<std::size_t> bits{1, 2, 3};
  std::size_t n_max = 16;  // n ranges over 2 .. n_max / b
  std::size_t instances = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SyntheticSpec synthetic;  // num_groups and seed are overwritten
  BnbConfig problem;        // groups and bits are overwritten
};

struct CensusResult {
  std::vector<CensusRow> rows;
  CensusFit fit;          // on cascade_nodes
  CensusFit fit_final;    // on nodes_visited
};

std::uint64_t census_seed(std::uint64_t seed, std::size_t n, std::size_t b, std::size_t instance);
CensusFit fit_tree_sizes(std::span<const double> bn, std::span<const double> nodes);
CensusResult run_census(const CensusConfig& config,
                        const std::function<void(const CensusRow&)>& progress = {});

}  // namespace catxl

#endif  // CATXL_BNB_HPP
