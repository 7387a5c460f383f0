#include "catxl/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "catxl/compression.hpp"
#include "catxl/risk.hpp"

namespace catxl {

namespace {

__extension__ typedef __int128 Wide;

// Sum of the `count` largest values and the count-th largest itself.
struct TopSum {
  std::int64_t sum_above = 0;  // sum of values strictly above `last`
  std::size_t count_above = 0;
  std::int64_t sum_top = 0;  // sum of the count - 1 largest
  std::int64_t last = 0;     // count-th largest
  std::int64_t max = 0;
};

TopSum top_sum(std::span<const std::int64_t> values, std::size_t count,
               std::vector<std::int64_t>& scratch) {
  scratch.clear();
  if (count <= 32) {
    for (auto v : values) {
      if (scratch.size() == count && v <= scratch.back()) continue;
      auto pos = std::upper_bound(scratch.begin(), scratch.end(), v, std::greater<>());
      scratch.insert(pos, v);
      if (scratch.size() > count) scratch.pop_back();
    }
  } else {
    scratch.assign(values.begin(), values.end());
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(count - 1),
                     scratch.end(), std::greater<>());
    scratch.resize(count);
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
  }
  TopSum r;
  r.last = scratch.back();
  r.max = scratch.front();
  for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
    r.sum_top += scratch[i];
    if (scratch[i] > r.last) {
      r.sum_above += scratch[i];
      ++r.count_above;
    }
  }
  return r;
}

std::size_t tail_size(const BnbProblem& p) { return p.years - nearest_rank(p.years, p.beta) + 1; }

std::vector<std::int64_t> capped_units(std::span<const double> raw, Currency limit) {
  std::vector<std::int64_t> out(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) out[t] = to_units(std::min(limit, raw[t]));
  return out;
}

std::int64_t profit_units(const std::vector<std::int64_t>& recovery, double rho) {
  std::int64_t sum = 0;
  for (auto r : recovery) sum += r;
  return -std::llround(rho * static_cast<double>(sum) / static_cast<double>(recovery.size()));
}

// Maps a wanted layer boundary to one the store can evaluate.
using Snap = std::function<Currency(Currency)>;

std::vector<std::int64_t> layer_units(const CumulativeLossStore& store, PerilId p, Currency a,
                                      Currency top) {
  std::vector<double> raw(store.num_years(), 0.0);
  const Currency l = top - a;
  if (l > 0.0) store.add_layer_recovery(p, a, l, raw);
  return capped_units(raw, std::max(l, 0.0));
}

// Fills candidate and corner recoveries, profits and the dominating l*
// vector from the store.
void fill_tables(BnbGroup& g, const CumulativeLossStore& store, PerilId p, double rho,
                 Currency star_top, const Snap& snap_attachment, const Snap& snap_top) {
  const std::size_t side = g.attachments.size();
  const auto years = store.num_years();
  g.recovery.clear();
  g.profit.clear();
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      g.recovery.push_back(layer_units(store, p, g.attachments[i], g.tops[i * side + j]));
      g.profit.push_back(profit_units(g.recovery.back(), rho));
    }
  }
  g.corner_recovery.clear();
  g.corner_profit.clear();
  for (std::size_t i = 0; i <= side; ++i) {
    const Currency a = snap_attachment(g.a_edges[i]);
    for (std::size_t j = 0; j <= side; ++j) {
      const Currency top = j == 0 ? a : std::max(a, snap_top(g.a_edges[i] + g.l_edges[j]));
      g.corner_recovery.push_back(layer_units(store, p, a, top));
      g.corner_profit.push_back(profit_units(g.corner_recovery.back(), rho));
    }
  }
  g.star = layer_units(store, p, g.a_min, star_top);
  for (const auto& r : g.recovery) {
    for (std::uint32_t t = 0; t < years; ++t) g.star[t] = std::max(g.star[t], r[t]);
  }
}

void fill_edges(BnbGroup& g, std::size_t side) {
  g.a_edges.clear();
  g.l_edges.clear();
  const double a_step = (g.a_max - g.a_min) / static_cast<double>(side);
  const double l_step = g.l_max / static_cast<double>(side);
  for (std::size_t k = 0; k <= side; ++k) {
    g.a_edges.push_back(k == side ? g.a_max : g.a_min + static_cast<double>(k) * a_step);
    g.l_edges.push_back(k == side ? g.l_max : static_cast<double>(k) * l_step);
  }
}

void finish_problem(BnbProblem& prob, const CumulativeLossStore& store, const BnbConfig& config) {
  prob.bits = config.bits;
  prob.rho = config.rho;
  prob.risk = config.risk;
  prob.beta = config.beta;
  prob.years = store.num_years();
  prob.gross.resize(prob.years);
  for (std::uint32_t t = 0; t < prob.years; ++t) prob.gross[t] = to_units(store.yearly_gross()[t]);
  prob.set_k_max(config.k_max ? *config.k_max
                              : config.k_max_factor * prob.risk_value(prob.gross));
}

// Per-depth tables of the interleaved search tree of one group: the
// elementwise maximum recovery and the maximum profit over every dyadic
// rectangle of candidates. Level d fixes ceil(d/2) attachment bits and
// floor(d/2) limit bits.
class GroupTables {
 public:
  GroupTables(const BnbGroup& g, std::size_t bits) : g_(g), bits_(bits) {
    const std::size_t levels = 2 * bits;
    offset_.resize(levels + 1);
    std::size_t total = 0;
    for (std::size_t d = 0; d < levels; ++d) {
      offset_[d] = total;
      total += std::size_t{1} << d;
    }
    env_.resize(total);
    best_.resize(total);
    for (std::size_t d = levels; d-- > 0;) {
      const bool a_bit = d % 2 == 0;
      for (std::size_t a = 0; a < a_count(d); ++a) {
        for (std::size_t l = 0; l < l_count(d); ++l) {
          const auto [a1, l1, a2, l2] = a_bit ? std::array<std::size_t, 4>{2 * a, l, 2 * a + 1, l}
                                              : std::array<std::size_t, 4>{a, 2 * l, a, 2 * l + 1};
          // Risk-optimistic corner (lowest A, largest L) and profit-optimistic
          // corner (highest A, smallest L) of the node's intervals. The max
          // with the children keeps the bounds sound when edges were snapped.
          const std::size_t wa = side() >> ((d + 1) / 2), wl = side() >> (d / 2);
          const auto& risky = corner(a * wa, (l + 1) * wl);
          const auto& x = env(d + 1, a1, l1);
          const auto& y = env(d + 1, a2, l2);
          auto& out = env_[id(d, a, l)];
          out.resize(x.size());
          for (std::size_t t = 0; t < x.size(); ++t) {
            out[t] = std::max(risky[t], std::max(x[t], y[t]));
          }
          best_[id(d, a, l)] =
              std::max(g_.corner_profit[(a + 1) * wa * (side() + 1) + l * wl],
                       std::max(best(d + 1, a1, l1), best(d + 1, a2, l2)));
        }
      }
    }
  }

  const std::vector<std::int64_t>& env(std::size_t d, std::size_t a, std::size_t l) const {
    if (d == 2 * bits_) return g_.recovery[a * side() + l];
    return env_[id(d, a, l)];
  }
  std::int64_t best(std::size_t d, std::size_t a, std::size_t l) const {
    if (d == 2 * bits_) return g_.profit[a * side() + l];
    return best_[id(d, a, l)];
  }

 private:
  std::size_t side() const { return std::size_t{1} << bits_; }
  const std::vector<std::int64_t>& corner(std::size_t i, std::size_t j) const {
    return g_.corner_recovery[i * (side() + 1) + j];
  }
  static std::size_t a_count(std::size_t d) { return std::size_t{1} << ((d + 1) / 2); }
  static std::size_t l_count(std::size_t d) { return std::size_t{1} << (d / 2); }
  std::size_t id(std::size_t d, std::size_t a, std::size_t l) const {
    return offset_[d] + a * l_count(d) + l;
  }

  const BnbGroup& g_;
  std::size_t bits_;
  std::vector<std::size_t> offset_;
  std::vector<std::vector<std::int64_t>> env_;
  std::vector<std::int64_t> best_;
};

struct Tables {
  std::vector<GroupTables> groups;
  // starsuf[g] = sum of l* recoveries of groups g .. n-1
  std::vector<std::vector<std::int64_t>> starsuf;

  explicit Tables(const BnbProblem& p) {
    for (const auto& g : p.groups) groups.emplace_back(g, p.bits);
    starsuf.assign(p.n() + 1, std::vector<std::int64_t>(p.years, 0));
    for (std::size_t g = p.n(); g-- > 0;) {
      for (std::uint32_t t = 0; t < p.years; ++t) {
        starsuf[g][t] = starsuf[g + 1][t] + p.groups[g].star[t];
      }
    }
  }
};

// Depth-first search over groups start .. n-1 with groups before `start`
// contributing the fixed recovery vector `fixed`.
class Search {
 public:
  using RestBound = std::function<std::int64_t(std::size_t m, std::size_t d, std::size_t a,
                                               std::size_t l, const std::vector<std::int64_t>&)>;

  Search(const BnbProblem& p, const Tables& tables, std::span<const std::int64_t> pimax,
         std::size_t start, const std::vector<std::int64_t>& fixed, RestBound rest = {})
      : p_(p), t_(tables), pimax_(pimax), start_(start), rest_(std::move(rest)) {
    prefix_.assign(p.n() + 1, std::vector<std::int64_t>(p.years, 0));
    prefix_[start] = fixed;
    net_.resize(p.years);
    assign_.assign(p.n(), 0);
    tail_ = tail_size(p);
  }

  SuffixSolution run() {
    // Incumbent: every suffix group at its lowest attachment and largest limit.
    const std::size_t side = p_.side();
    std::vector<std::int64_t> net(p_.years);
    std::int64_t profit = 0;
    for (std::uint32_t t = 0; t < p_.years; ++t) net[t] = p_.gross[t] - prefix_[start_][t];
    for (std::size_t g = start_; g < p_.n(); ++g) {
      const auto& r = p_.groups[g].recovery[side - 1];
      for (std::uint32_t t = 0; t < p_.years; ++t) net[t] -= r[t];
      profit += p_.groups[g].profit[side - 1];
    }
    if (p_.feasible(net)) {
      has_inc_ = true;
      inc_ = profit;
      inc_assign_.assign(p_.n() - start_, side - 1);
    }
    if (start_ < p_.n()) visit(start_, 0, 0, 0, 0, true);
    SuffixSolution s;
    s.start = start_;
    s.pimax = has_inc_ ? inc_ : kNoProfit;
    s.assignment = inc_assign_;
    s.nodes = nodes_;
    return s;
  }

  std::uint64_t pruned_profit() const { return pruned_profit_; }
  std::uint64_t pruned_risk() const { return pruned_risk_; }

 private:
  bool is_risk_infeasible(std::int64_t rest) const { return rest == kNoProfit; }

  void visit(std::size_t m, std::size_t d, std::size_t a, std::size_t l, std::int64_t assigned,
             bool count) {
    if (count) ++nodes_;
    const auto& env = t_.groups[m].env(d, a, l);
    const std::int64_t rest = rest_ ? rest_(m, d, a, l, prefix_[m]) : pimax_[m + 1];
    if (is_risk_infeasible(rest)) {
      ++pruned_risk_;
      return;
    }
    const std::int64_t ub = assigned + t_.groups[m].best(d, a, l) + rest;
    if (has_inc_ && ub <= inc_) {
      ++pruned_profit_;
      return;
    }
    const auto& pre = prefix_[m];
    const auto& suf = t_.starsuf[m + 1];
    for (std::uint32_t t = 0; t < p_.years; ++t) net_[t] = p_.gross[t] - pre[t] - env[t] - suf[t];
    if (p_.surely_infeasible(net_)) {
      ++pruned_risk_;
      return;
    }
    if (d == 2 * p_.bits) {
      const std::size_t c = a * p_.side() + l;
      const std::int64_t value = assigned + p_.groups[m].profit[c];
      assign_[m] = c;
      if (m + 1 == p_.n()) {
        if (!p_.feasible(net_)) {
          ++pruned_risk_;
          return;
        }
        if (!has_inc_ || value > inc_) {
          has_inc_ = true;
          inc_ = value;
          inc_assign_.assign(assign_.begin() + static_cast<std::ptrdiff_t>(start_), assign_.end());
        }
        return;
      }
      auto& next = prefix_[m + 1];
      for (std::uint32_t t = 0; t < p_.years; ++t) next[t] = pre[t] + env[t];
      // The group leaf doubles as the root of the next group.
      visit(m + 1, 0, 0, 0, value, false);
      return;
    }
    // Cheap layers first: upper attachment half, then lower limit half.
    if (d % 2 == 0) {
      visit(m, d + 1, 2 * a + 1, l, assigned, true);
      visit(m, d + 1, 2 * a, l, assigned, true);
    } else {
      visit(m, d + 1, a, 2 * l, assigned, true);
      visit(m, d + 1, a, 2 * l + 1, assigned, true);
    }
  }

  const BnbProblem& p_;
  const Tables& t_;
  std::span<const std::int64_t> pimax_;
  std::size_t start_;
  RestBound rest_;
  std::vector<std::vector<std::int64_t>> prefix_;
  std::vector<std::int64_t> net_;
  std::vector<std::size_t> assign_;
  std::size_t tail_ = 1;
  bool has_inc_ = false;
  std::int64_t inc_ = kNoProfit;
  std::vector<std::size_t> inc_assign_;
  std::uint64_t nodes_ = 0;
  std::uint64_t pruned_profit_ = 0;
  std::uint64_t pruned_risk_ = 0;
};

void fill_exhaustive(TreeStats& s, std::size_t n, std::size_t b) {
  const double depth = static_cast<double>(2 * n * b);
  s.exhaustive_leaf_count = std::pow(2.0, depth);
  s.exhaustive_tree_nodes = std::pow(2.0, depth + 1.0) - 1.0;
  s.reduction_factor =
      s.exhaustive_tree_nodes / static_cast<double>(std::max<std::uint64_t>(1, s.nodes_visited));
}

void finish_result(const BnbProblem& p, BnbResult& r) {
  std::vector<std::int64_t> all_star(p.years);
  for (std::uint32_t t = 0; t < p.years; ++t) {
    std::int64_t s = 0;
    for (const auto& g : p.groups) s += g.star[t];
    all_star[t] = p.gross[t] - s;
  }
  r.min_risk = p.risk_value(all_star);
  if (r.feasible) {
    r.objective = from_units(r.objective_units);
    r.risk = p.risk_value(p.net_loss(r.assignment));
  } else {
    r.risk = r.min_risk;
  }
  fill_exhaustive(r.stats, p.n(), p.bits);
}

std::vector<std::int64_t> star_prefix(const BnbProblem& p, std::size_t upto) {
  std::vector<std::int64_t> v(p.years, 0);
  for (std::size_t g = 0; g < upto; ++g) {
    for (std::uint32_t t = 0; t < p.years; ++t) v[t] += p.groups[g].star[t];
  }
  return v;
}

// pimax[i] for i = 1 .. n-1 (pimax[n] = 0); pimax[0] unused.
std::vector<std::int64_t> suffix_table(const BnbProblem& p, const Tables& tables, BnbResult& r) {
  std::vector<std::int64_t> pimax(p.n() + 1, 0);
  for (std::size_t i = p.n(); i-- > 1;) {
    Search s(p, tables, pimax, i, star_prefix(p, i));
    auto sol = s.run();
    pimax[i] = sol.pimax;
    r.stats.cascade_nodes += sol.nodes;
    r.suffixes.push_back(std::move(sol));
  }
  return pimax;
}

}  // namespace

std::int64_t to_units(double currency) { return std::llround(currency * kUnitsPerCurrency); }
double from_units(std::int64_t units) { return static_cast<double>(units) / kUnitsPerCurrency; }

void BnbConfig::validate() const {
  if (groups < 1) throw ConfigError("branch and bound: need at least one group");
  if (bits < 1 || bits > 6) throw ConfigError("branch and bound: bits must lie in [1, 6]");
  if (!(rho >= 0.0)) throw ConfigError("branch and bound: rho must be >= 0");
  if (!(p_attach > 0.0 && p_attach < 1.0)) {
    throw ConfigError("branch and bound: p_attach must lie in (0, 1)");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("branch and bound: beta must lie in (0, 1)");
}

void BnbProblem::set_k_max(double k) {
  k_max = k;
  if (!(k < 9e12)) {
    k_max_units = std::numeric_limits<std::int64_t>::max();
  } else {
    k_max_units = static_cast<std::int64_t>(std::floor(k * kUnitsPerCurrency));
  }
}

double BnbProblem::risk_value(std::span<const std::int64_t> net) const {
  std::vector<std::int64_t> scratch;
  const auto top = top_sum(net, tail_size(*this), scratch);
  if (risk == BnbRiskKind::aep || top.count_above == 0) return from_units(top.last);
  return static_cast<double>(top.sum_above) / static_cast<double>(top.count_above) /
         kUnitsPerCurrency;
}

bool BnbProblem::feasible(std::span<const std::int64_t> net) const {
  thread_local std::vector<std::int64_t> scratch;
  const auto top = top_sum(net, tail_size(*this), scratch);
  if (risk == BnbRiskKind::aep || top.count_above == 0) return top.last <= k_max_units;
  return Wide{top.sum_above} <= Wide{k_max_units} * static_cast<Wide>(top.count_above);
}

bool BnbProblem::surely_infeasible(std::span<const std::int64_t> net) const {
  thread_local std::vector<std::int64_t> scratch;
  const std::size_t m = tail_size(*this);
  const auto top = top_sum(net, m, scratch);
  if (risk == BnbRiskKind::aep) return top.last > k_max_units;
  // TVaR is at least the mean of the m - 1 largest values (the maximum when
  // m == 1), and that mean is monotone in every entry.
  if (m == 1) return top.max > k_max_units;
  return Wide{top.sum_top} > Wide{k_max_units} * static_cast<Wide>(m - 1);
}

std::vector<std::int64_t> BnbProblem::net_loss(std::span<const std::size_t> assignment) const {
  std::vector<std::int64_t> net = gross;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& r = groups[g].recovery.at(assignment[g]);
    for (std::uint32_t t = 0; t < years; ++t) net[t] -= r[t];
  }
  return net;
}

std::int64_t BnbProblem::profit(std::span<const std::size_t> assignment) const {
  std::int64_t s = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) s += groups[g].profit.at(assignment[g]);
  return s;
}

Currency group_profit(const CumulativeLossStore& store, PerilId peril, Currency attachment,
                      Currency limit, double rho) {
  if (!(limit >= 0.0) || !(attachment >= 0.0)) throw DomainError("layer out of range");
  if (limit == 0.0) return 0.0;
  std::vector<double> raw(store.num_years(), 0.0);
  store.add_layer_recovery(peril, attachment, limit, raw);
  for (auto& r : raw) r = std::min(r, limit);
  return -rho * average(raw);
}

BnbProblem make_bnb_problem(const EventLossTable& table, const BnbConfig& config) {
  config.validate();
  const auto groups = GroupMap::identity(table.num_perils());
  const auto a_min = compute_min_attachments(table, groups, config.p_attach);
  const auto compressed = compress(table, groups, a_min);
  const std::size_t side = std::size_t{1} << config.bits;
  const auto years = table.num_trial_years();

  std::vector<BnbGroup> out(table.num_perils());
  std::vector<std::vector<Currency>> thresholds(table.num_perils());
  std::vector<std::vector<Currency>> yearly_ceded(table.num_perils(),
                                                  std::vector<Currency>(years, 0.0));
  for (const auto& e : compressed.table.events()) {
    yearly_ceded[e.peril][e.trial_year] += e.loss - a_min[e.peril];
  }
  for (PerilId p = 0; p < table.num_perils(); ++p) {
    auto& g = out[p];
    g.name = table.peril_name(p);
    g.a_min = a_min[p];
    const auto maxima = table.yearly_max(p);
    g.a_max = std::max(g.a_min, *std::max_element(maxima.begin(), maxima.end()));
    g.l_max = *std::max_element(yearly_ceded[p].begin(), yearly_ceded[p].end());
    if (!(g.l_max > 0.0)) g.l_max = 1.0;
    const double a_step = (g.a_max - g.a_min) / static_cast<double>(side);
    const double l_step = g.l_max / static_cast<double>(side);
    for (std::size_t i = 0; i < side; ++i) {
      g.attachments.push_back(g.a_min + (static_cast<double>(i) + 0.5) * a_step);
    }
    for (std::size_t i = 0; i < side; ++i) {
      for (std::size_t j = 0; j < side; ++j) {
        g.tops.push_back(g.attachments[i] + (static_cast<double>(j) + 0.5) * l_step);
      }
    }
    fill_edges(g, side);
    std::vector<Currency> grid = g.attachments;
    grid.insert(grid.end(), g.tops.begin(), g.tops.end());
    for (auto a : g.a_edges) {
      grid.push_back(a);
      for (auto l : g.l_edges) grid.push_back(a + l);
    }
    grid.push_back(g.a_min + g.l_max);
    if (g.a_min > 0.0) grid.push_back(g.a_min);
    thresholds[p] = merge_grids(std::move(grid), {});
  }
  std::vector<Currency> floor(table.num_perils());
  for (PerilId p = 0; p < table.num_perils(); ++p) floor[p] = out[p].a_min;
  const auto store =
      CumulativeLossStore::build(compressed.table, std::move(thresholds), compressed.base_loss,
                                 compressed.base_max, floor);
  BnbProblem prob;
  for (PerilId p = 0; p < table.num_perils(); ++p) {
    const Snap exact = [](Currency x) { return x; };
    fill_tables(out[p], store, p, config.rho, out[p].a_min + out[p].l_max, exact, exact);
  }
  prob.groups = std::move(out);
  finish_problem(prob, store, config);
  return prob;
}

BnbProblem make_synthetic_problem(const SyntheticSpec& spec, const BnbConfig& config) {
  return make_bnb_problem(generate_synthetic(spec), config);
}

BnbProblem make_store_problem(const CumulativeLossStore& store, const BnbConfig& config) {
  config.validate();
  const std::size_t side = std::size_t{1} << config.bits;
  const auto years = store.num_years();
  BnbProblem prob;
  for (PerilId p = 0; p < store.num_perils(); ++p) {
    const auto& grid = store.thresholds(p);
    if (grid.empty()) throw ConfigError("store peril '" + store.peril_names()[p] + "' has no grid");
    BnbGroup g;
    g.name = store.peril_names()[p];
    std::vector<Currency> maxima(store.max_event(p).begin(), store.max_event(p).end());
    std::sort(maxima.begin(), maxima.end());
    const auto allowed = static_cast<std::size_t>(
        std::floor(config.p_attach * static_cast<double>(years) + 1e-9));
    Currency a = allowed < years ? maxima[years - allowed - 1] : 0.0;
    a = std::max(a, store.floor(p));
    auto lo = std::lower_bound(grid.begin(), grid.end(), a - kCurrencyTolerance);
    if (lo == grid.end()) --lo;
    g.a_min = *lo;
    g.a_max = std::max(g.a_min, maxima.back());
    const auto excess = store.excess_column(p, static_cast<std::size_t>(lo - grid.begin()));
    g.l_max = *std::max_element(excess.begin(), excess.end());
    if (!(g.l_max > 0.0)) g.l_max = 1.0;

    // Nearest grid value in [from, end).
    auto nearest = [&](std::vector<Currency>::const_iterator from, Currency x) {
      auto it = std::lower_bound(from, grid.end(), x);
      if (it == grid.end()) return *(it - 1);
      if (it != from && x - *(it - 1) <= *it - x) return *(it - 1);
      return *it;
    };
    const double a_step = (g.a_max - g.a_min) / static_cast<double>(side);
    const double l_step = g.l_max / static_cast<double>(side);
    for (std::size_t i = 0; i < side; ++i) {
      g.attachments.push_back(nearest(lo, g.a_min + (static_cast<double>(i) + 0.5) * a_step));
    }
    for (std::size_t i = 0; i < side; ++i) {
      const auto above = std::upper_bound(grid.begin(), grid.end(),
                                          g.attachments[i] + kCurrencyTolerance);
      for (std::size_t j = 0; j < side; ++j) {
        const Currency target = g.attachments[i] + (static_cast<double>(j) + 0.5) * l_step;
        g.tops.push_back(above == grid.end() ? g.attachments[i] : nearest(above, target));
      }
    }
    auto star = std::lower_bound(grid.begin(), grid.end(), g.a_min + g.l_max - kCurrencyTolerance);
    const Currency star_top = star == grid.end() ? grid.back() : *star;
    fill_edges(g, side);
    const Snap snap_a = [&](Currency x) { return nearest(lo, x); };
    const Snap snap_top = [&](Currency x) { return nearest(grid.begin(), x); };
    fill_tables(g, store, p, config.rho, star_top, snap_a, snap_top);
    prob.groups.push_back(std::move(g));
  }
  finish_problem(prob, store, config);
  return prob;
}

BnbResult solve_cascade(const BnbProblem& p) {
  BnbResult r;
  const Tables tables(p);
  const auto pimax = suffix_table(p, tables, r);
  std::vector<std::int64_t> all_star(p.years);
  for (std::uint32_t t = 0; t < p.years; ++t) all_star[t] = p.gross[t] - tables.starsuf[0][t];
  if (!p.surely_infeasible(all_star)) {
    Search s(p, tables, pimax, 0, std::vector<std::int64_t>(p.years, 0));
    auto sol = s.run();
    r.stats.nodes_visited = sol.nodes;
    r.stats.nodes_pruned_by_profit = s.pruned_profit();
    r.stats.nodes_pruned_by_risk = s.pruned_risk();
    r.stats.cascade_nodes += sol.nodes;
    if (sol.pimax != kNoProfit) {
      r.feasible = true;
      r.objective_units = sol.pimax;
      r.assignment = std::move(sol.assignment);
    }
  }
  finish_result(p, r);
  return r;
}

BnbResult recursive_bound_solve(const BnbProblem& p) {
  if (p.n() > 4 || p.n() * p.bits > 8) {
    throw ConfigError("recursive bound solver is limited to n <= 4 and n b <= 8 (got n = " +
                      std::to_string(p.n()) + ", b = " + std::to_string(p.bits) + ")");
  }
  BnbResult r;
  const Tables tables(p);
  const auto pimax = suffix_table(p, tables, r);
  std::map<std::vector<std::int64_t>, std::int64_t> memo;
  // Best profit of groups m+1.. given the actual prefix and the active
  // group's optimistic recovery.
  auto rest = [&](std::size_t m, std::size_t d, std::size_t a, std::size_t l,
                  const std::vector<std::int64_t>& prefix) -> std::int64_t {
    if (m + 1 == p.n()) return 0;
    const auto& env = tables.groups[m].env(d, a, l);
    std::vector<std::int64_t> cond(p.years);
    for (std::uint32_t t = 0; t < p.years; ++t) cond[t] = prefix[t] + env[t];
    std::vector<std::int64_t> key = cond;
    key.push_back(static_cast<std::int64_t>(m));
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Search sub(p, tables, pimax, m + 1, cond);
    const auto value = sub.run().pimax;
    memo.emplace(std::move(key), value);
    return value;
  };
  std::vector<std::int64_t> all_star(p.years);
  for (std::uint32_t t = 0; t < p.years; ++t) all_star[t] = p.gross[t] - tables.starsuf[0][t];
  if (!p.surely_infeasible(all_star)) {
    Search s(p, tables, pimax, 0, std::vector<std::int64_t>(p.years, 0), rest);
    auto sol = s.run();
    r.stats.nodes_visited = sol.nodes;
    r.stats.nodes_pruned_by_profit = s.pruned_profit();
    r.stats.nodes_pruned_by_risk = s.pruned_risk();
    if (sol.pimax != kNoProfit) {
      r.feasible = true;
      r.objective_units = sol.pimax;
      r.assignment = std::move(sol.assignment);
    }
  }
  finish_result(p, r);
  return r;
}

BnbResult brute_force_solve(const BnbProblem& p) {
  BnbResult r;
  const std::size_t c = p.candidates();
  std::vector<std::size_t> assign(p.n(), 0);
  for (;;) {
    const auto net = p.net_loss(assign);
    if (p.feasible(net)) {
      const auto value = p.profit(assign);
      if (!r.feasible || value > r.objective_units) {
        r.feasible = true;
        r.objective_units = value;
        r.assignment = assign;
      }
    }
    ++r.stats.nodes_visited;
    std::size_t g = 0;
    while (g < p.n() && ++assign[g] == c) assign[g++] = 0;
    if (g == p.n()) break;
  }
  finish_result(p, r);
  return r;
}

}  // namespace catxl
