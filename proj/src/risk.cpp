#include "catxl/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace catxl {

namespace {

// The m largest values, descending.
std::vector<double> top_values(std::span<const double> values, std::size_t m) {
  std::vector<double> top;
  if (m <= 32) {
    top.reserve(m + 1);
    for (double v : values) {
      if (top.size() == m && !(v > top.back())) continue;
      auto pos = std::upper_bound(top.begin(), top.end(), v, std::greater<>());
      top.insert(pos, v);
      if (top.size() > m) top.pop_back();
    }
  } else {
    top.assign(values.begin(), values.end());
    std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(m - 1), top.end(),
                     std::greater<>());
    top.resize(m);
    std::sort(top.begin(), top.end(), std::greater<>());
  }
  return top;
}

std::size_t tail_count(std::size_t n, double beta) { return n - nearest_rank(n, beta) + 1; }

// Net loss restricted to the group of one peril.
std::vector<Currency> group_net_loss(const Contract& contract, const YearlyResult& yearly,
                                     const CumulativeLossStore& store, GroupId g) {
  const auto years = store.num_years();
  std::vector<Currency> net(years, 0.0);
  auto perils = contract.grouping.groups.at(g).perils();
  std::sort(perils.begin(), perils.end());
  for (auto p : perils) {
    const auto gross = store.gross(p);
    for (YearIndex t = 0; t < years; ++t) net[t] += gross[t];
  }
  for (std::size_t i = 0; i < contract.layers.size(); ++i) {
    if (contract.layers[i].group != g) continue;
    const auto& lr = yearly.layers[i];
    for (YearIndex t = 0; t < years; ++t) net[t] -= lr.recovery[t] - lr.reinstatement_premium[t];
  }
  return net;
}

PerilId require_peril(const CumulativeLossStore& store, const std::string& name) {
  auto p = store.find_peril(name);
  if (!p) throw ValidationError("constraint refers to unknown peril '" + name + "'");
  return *p;
}

}  // namespace

std::size_t nearest_rank(std::size_t n, double beta) {
  if (n == 0) throw DomainError("percentile of an empty list");
  const double r = std::ceil(beta * static_cast<double>(n) - 1e-9);
  if (r < 1.0) return 1;
  if (r > static_cast<double>(n)) return n;
  return static_cast<std::size_t>(r);
}

double percentile(std::span<const double> values, double beta) {
  const std::size_t m = tail_count(values.size(), beta);
  return top_values(values, m).back();
}

double tvar(std::span<const double> values, double beta) {
  const std::size_t m = tail_count(values.size(), beta);
  const auto top = top_values(values, m);
  const double p = top.back();
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : top) {
    if (!(v > p)) break;
    sum += v;
    ++count;
  }
  return count == 0 ? p : sum / static_cast<double>(count);
}

double aep(std::span<const double> net_losses, double beta) { return percentile(net_losses, beta); }

double attachment_probability(std::span<const double> recoveries) {
  if (recoveries.empty()) throw DomainError("attachment probability over zero trial years");
  std::size_t hits = 0;
  for (double r : recoveries) hits += r > 0.0 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(recoveries.size());
}

double penalty(double value, double threshold, double scale) {
  return -scale * std::max(0.0, value - threshold);
}

double beta_from_return_period(double years) {
  if (!(years > 1.0)) throw DomainError("return period must exceed one year");
  return 1.0 - 1.0 / years;
}

std::vector<Currency> net_max_events(const Contract& contract, const CumulativeLossStore& store,
                                     PerilId p) {
  const auto maxima = store.max_event(p);
  std::vector<Currency> out(maxima.begin(), maxima.end());
  const auto g = contract.grouping.group_of(p);
  if (!g) return out;
  Currency shift = 0.0;
  for (const auto& s : contract.grouping.groups[*g].subgroups) {
    if (std::find(s.perils.begin(), s.perils.end(), p) != s.perils.end()) shift = s.shift;
  }
  for (const auto& layer : contract.layers) {
    if (layer.group != *g) continue;
    for (std::size_t t = 0; t < out.size(); ++t) {
      out[t] -= event_recovery(maxima[t], layer.attachment + shift, layer.limit);
    }
  }
  return out;
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::tvar: return "tvar";
    case ConstraintKind::aep: return "aep";
    case ConstraintKind::oep: return "oep";
    case ConstraintKind::attach_prob: return "attach_prob";
  }
  return "?";
}

ConstraintKind constraint_kind_from_string(const std::string& s) {
  if (s == "tvar") return ConstraintKind::tvar;
  if (s == "aep") return ConstraintKind::aep;
  if (s == "oep") return ConstraintKind::oep;
  if (s == "attach_prob" || s == "attach-prob") return ConstraintKind::attach_prob;
  throw ValidationError("unknown constraint kind '" + s + "'");
}

void ConstraintSpec::validate() const {
  if (kind != ConstraintKind::attach_prob && !(beta > 0.0 && beta < 1.0)) {
    throw ValidationError("constraint " + label() + ": beta must lie in (0, 1)");
  }
  if (penalty_scale && !(*penalty_scale >= 0.0)) {
    throw ValidationError("constraint " + label() + ": penalty scale must be >= 0");
  }
}

std::string ConstraintSpec::label() const {
  std::string s = to_string(kind);
  if (kind != ConstraintKind::attach_prob) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "@%g", beta);
    s += buf;
  }
  if (!peril.empty()) s += "[" + peril + "]";
  return s;
}

std::vector<ConstraintSpec> resolve_penalty_scales(std::vector<ConstraintSpec> constraints,
                                                   Currency baseline_profit) {
  for (auto& c : constraints) {
    if (c.penalty_scale) continue;
    const double tau = std::abs(c.threshold);
    c.penalty_scale = std::abs(baseline_profit) / (tau > 0.0 ? tau : 1.0);
  }
  return constraints;
}

double constraint_value(const ConstraintSpec& spec, const Contract& contract,
                        const YearlyResult& yearly, const CumulativeLossStore& store) {
  std::optional<PerilId> peril;
  if (!spec.peril.empty()) peril = require_peril(store, spec.peril);
  switch (spec.kind) {
    case ConstraintKind::tvar:
    case ConstraintKind::aep: {
      std::vector<Currency> scoped;
      std::span<const double> net = yearly.net_loss;
      if (peril) {
        scoped = group_net_loss(contract, yearly, store, *contract.grouping.group_of(*peril));
        net = scoped;
      }
      return spec.kind == ConstraintKind::tvar ? tvar(net, spec.beta) : aep(net, spec.beta);
    }
    case ConstraintKind::oep: {
      if (peril) return percentile(net_max_events(contract, store, *peril), spec.beta);
      double worst = 0.0;
      for (PerilId p = 0; p < store.num_perils(); ++p) {
        worst = std::max(worst, percentile(net_max_events(contract, store, p), spec.beta));
      }
      return worst;
    }
    case ConstraintKind::attach_prob: {
      std::optional<GroupId> g;
      if (peril) g = contract.grouping.group_of(*peril);
      double worst = 0.0;
      for (std::size_t i = 0; i < contract.layers.size(); ++i) {
        if (g && contract.layers[i].group != *g) continue;
        worst = std::max(worst, attachment_probability(yearly.layers[i].recovery));
      }
      return worst;
    }
  }
  return 0.0;
}

RiskReport assess(const Contract& contract, const YearlyResult& yearly,
                  const CumulativeLossStore& store, std::span<const ConstraintSpec> constraints,
                  const RiskOptions& options) {
  RiskReport r;
  r.avg_net_profit = yearly.avg_net_profit;
  r.tvar = tvar(yearly.net_loss, options.tvar_beta);
  for (double b : options.aep_betas) r.aep.emplace_back(b, aep(yearly.net_loss, b));
  if (!options.oep_betas.empty()) {
    for (PerilId p = 0; p < store.num_perils(); ++p) {
      const auto net = net_max_events(contract, store, p);
      for (double b : options.oep_betas) r.oep.push_back({b, p, percentile(net, b)});
    }
  }
  for (const auto& lr : yearly.layers) r.attach_prob.push_back(attachment_probability(lr.recovery));
  r.objective = r.avg_net_profit;
  for (const auto& c : constraints) {
    ConstraintResult cr;
    cr.spec = c;
    cr.value = constraint_value(c, contract, yearly, store);
    cr.penalty = penalty(cr.value, c.threshold, c.penalty_scale.value_or(0.0));
    cr.satisfied = cr.value < c.threshold;
    r.objective += cr.penalty;
    r.feasible = r.feasible && cr.satisfied;
    r.constraints.push_back(std::move(cr));
  }
  return r;
}

}  // namespace catxl
