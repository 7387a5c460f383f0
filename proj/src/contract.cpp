#include "catxl/contract.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace catxl {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::vector<PerilId> PerilGroup::perils() const {
  std::vector<PerilId> out;
  for (const auto& s : subgroups) out.insert(out.end(), s.perils.begin(), s.perils.end());
  return out;
}

PerilId PerilGroup::lowest_peril() const {
  const auto all = perils();
  if (all.empty()) throw ValidationError("empty peril group");
  return *std::min_element(all.begin(), all.end());
}

Currency PerilGroup::min_shift() const {
  Currency m = 0.0;
  bool first = true;
  for (const auto& s : subgroups) {
    if (first || s.shift < m) m = s.shift;
    first = false;
  }
  return m;
}

PerilGrouping PerilGrouping::singletons(std::size_t num_perils) {
  PerilGrouping g;
  for (PerilId p = 0; p < num_perils; ++p) g.groups.push_back({{{{p}, 0.0}}});
  return g;
}

PerilGrouping PerilGrouping::single_group(std::size_t num_perils) {
  Subgroup s;
  for (PerilId p = 0; p < num_perils; ++p) s.perils.push_back(p);
  PerilGrouping g;
  g.groups.push_back({{s}});
  return g;
}

PerilGrouping PerilGrouping::from_partition(const std::vector<std::vector<PerilId>>& partition) {
  PerilGrouping g;
  for (const auto& part : partition) g.groups.push_back({{{part, 0.0}}});
  return g;
}

void PerilGrouping::validate(std::size_t num_perils) const {
  std::vector<int> seen(num_perils, 0);
  for (const auto& g : groups) {
    if (g.subgroups.empty()) throw ValidationError("grouping: group without subgroups");
    for (const auto& s : g.subgroups) {
      if (s.perils.empty()) throw ValidationError("grouping: empty subgroup");
      for (auto p : s.perils) {
        if (p >= num_perils) throw ValidationError("grouping: unknown peril id " + std::to_string(p));
        if (seen[p]++) throw ValidationError("grouping: peril " + std::to_string(p) + " listed twice");
      }
    }
  }
  for (std::size_t p = 0; p < num_perils; ++p) {
    if (!seen[p]) throw ValidationError("grouping: peril " + std::to_string(p) + " not assigned");
  }
}

void PerilGrouping::canonicalize() {
  for (auto& g : groups) {
    for (auto& s : g.subgroups) std::sort(s.perils.begin(), s.perils.end());
    std::sort(g.subgroups.begin(), g.subgroups.end(),
              [](const Subgroup& a, const Subgroup& b) { return a.perils < b.perils; });
  }
  std::sort(groups.begin(), groups.end(), [](const PerilGroup& a, const PerilGroup& b) {
    return a.lowest_peril() < b.lowest_peril();
  });
}

GroupMap PerilGrouping::group_map(std::size_t num_perils) const {
  validate(num_perils);
  GroupMap m;
  m.group_of.assign(num_perils, 0);
  m.num_groups = static_cast<std::uint32_t>(groups.size());
  for (GroupId g = 0; g < groups.size(); ++g) {
    for (auto p : groups[g].perils()) m.group_of[p] = g;
  }
  return m;
}

std::optional<GroupId> PerilGrouping::group_of(PerilId p) const {
  for (GroupId g = 0; g < groups.size(); ++g) {
    for (const auto& s : groups[g].subgroups) {
      if (std::find(s.perils.begin(), s.perils.end(), p) != s.perils.end()) return g;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> Contract::tower(GroupId g) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].group == g) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return layers[a].attachment < layers[b].attachment;
  });
  return idx;
}

void Contract::validate(std::size_t num_perils) const {
  grouping.validate(num_perils);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string name = "layer " + std::to_string(i);
    if (l.group >= grouping.groups.size()) throw ValidationError(name + ": unknown group");
    if (!(l.limit > 0.0)) throw ValidationError(name + ": limit must be positive");
    if (!(l.attachment >= 0.0)) throw ValidationError(name + ": attachment must be >= 0");
    if (l.attachment + grouping.groups[l.group].min_shift() < -kCurrencyTolerance) {
      throw ValidationError(name + ": attachment plus subgroup shift is negative");
    }
  }
  for (GroupId g = 0; g < grouping.groups.size(); ++g) {
    const auto t = tower(g);
    for (std::size_t k = 1; k < t.size(); ++k) {
      if (!currency_equal(layers[t[k - 1]].top(), layers[t[k]].attachment)) {
        throw ValidationError("group " + std::to_string(g) +
                              ": tower is not contiguous (layer " + std::to_string(t[k]) +
                              " must attach where layer " + std::to_string(t[k - 1]) +
                              " exhausts)");
      }
    }
  }
}

void Contract::canonicalize() {
  // Remember each layer's group by its lowest peril so sorting groups keeps
  // the association.
  std::vector<PerilId> anchor(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    anchor[i] = grouping.groups.at(layers[i].group).lowest_peril();
  }
  grouping.canonicalize();
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].group = *grouping.group_of(anchor[i]);
  std::sort(layers.begin(), layers.end(), [](const Layer& a, const Layer& b) {
    if (a.group != b.group) return a.group < b.group;
    return a.attachment < b.attachment;
  });
}

std::string Contract::key() const {
  std::string out;
  for (const auto& g : grouping.groups) {
    out += '[';
    for (const auto& s : g.subgroups) {
      out += '(';
      for (auto p : s.perils) {
        out += std::to_string(p);
        out += ',';
      }
      out += '@';
      append_number(out, s.shift);
      out += ')';
    }
    out += ']';
  }
  out += '|';
  for (const auto& l : layers) {
    out += std::to_string(l.group);
    out += ':';
    append_number(out, l.attachment);
    out += ':';
    append_number(out, l.limit);
    out += ':';
    out += std::to_string(l.reinstatements);
    out += ';';
  }
  return out;
}

Currency event_recovery(Currency loss, Currency effective_attachment, Currency limit) {
  return std::min(std::max(0.0, loss - effective_attachment), limit);
}

PricingCurve PricingCurve::linear(double rol_min, double rho) {
  PricingCurve c;
  c.rol_min = rol_min;
  c.points = {{0.0, rol_min}, {1.0, rol_min + 1.0 + rho}};
  return c;
}

void PricingCurve::validate() const {
  if (!(rol_min > 0.0)) throw ValidationError("pricing curve: rol_min must be positive");
  if (points.size() < 2) throw ValidationError("pricing curve: at least two points required");
  if (points.front().first < 0.0) throw ValidationError("pricing curve: lol must be >= 0");
  if (points.front().second < rol_min) {
    throw ValidationError("pricing curve: first rol must be >= rol_min");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].second > points[i].first)) {
      throw ValidationError("pricing curve: rol must exceed lol at every point");
    }
    if (i > 0 && !(points[i].first > points[i - 1].first && points[i].second > points[i - 1].second)) {
      throw ValidationError("pricing curve: points must be strictly increasing");
    }
  }
}

double PricingCurve::operator()(double lol) const {
  if (lol <= points.front().first) {
    return lol == points.front().first ? points.front().second : rol_min;
  }
  std::size_t i = 1;
  while (i + 1 < points.size() && lol > points[i].first) ++i;
  const auto [x0, y0] = points[i - 1];
  const auto [x1, y1] = points[i];
  return y0 + (y1 - y0) * (lol - x0) / (x1 - x0);
}

void Pricing::validate() const {
  if (!(rho >= 0.0)) throw ValidationError("pricing: rho must be >= 0");
  if (mode == PricingMode::curve && !(rol_min > 0.0)) {
    throw ValidationError("pricing: rol_min must be positive");
  }
  if (curve) curve->validate();
  for (const auto& [name, c] : peril_curves) c.validate();
}

const PricingCurve* Pricing::curve_for(const PerilGroup& group,
                                       const std::vector<std::string>& peril_names) const {
  if (!peril_curves.empty()) {
    auto perils = group.perils();
    std::sort(perils.begin(), perils.end());
    for (auto p : perils) {
      auto it = peril_curves.find(peril_names.at(p));
      if (it != peril_curves.end()) return &it->second;
    }
  }
  return curve ? &*curve : nullptr;
}

Currency reinsurance_premium(Currency limit, Currency avg_recovery, const Pricing& pricing,
                             const PricingCurve* curve) {
  if (pricing.mode == PricingMode::expected_value) return (1.0 + pricing.rho) * avg_recovery;
  const double lol = avg_recovery / limit;
  if (curve) return limit * (*curve)(lol);
  return limit * PricingCurve::linear(pricing.rol_min, pricing.rho)(lol);
}

Currency reinstatement_premium(Currency limit, std::uint32_t reinstatements,
                               Currency yearly_recovery, Currency premium) {
  if (reinstatements == 0) return 0.0;
  return premium * std::min(static_cast<double>(reinstatements) * limit, yearly_recovery) / limit;
}

Currency average(std::span<const double> values) {
  if (values.empty()) throw DomainError("average over zero trial years");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

std::vector<Currency> uncapped_layer_recovery(const CumulativeLossStore& store,
                                              const PerilGroup& group, Currency attachment,
                                              Currency limit) {
  std::vector<Currency> out(store.num_years(), 0.0);
  for (const auto& s : group.subgroups) {
    const Currency a = attachment + s.shift;
    for (auto p : s.perils) store.add_layer_recovery(p, a, limit, out);
  }
  return out;
}

YearlyResult evaluate_contract(const Contract& contract, const CumulativeLossStore& store,
                               const Pricing& pricing, const LayerRecoveryFn& fetch) {
  const std::uint32_t years = store.num_years();
  if (years == 0) throw DomainError("store has zero trial years");
  YearlyResult res;
  res.gross = store.yearly_gross();
  res.layers.resize(contract.layers.size());

  for (std::size_t i = 0; i < contract.layers.size(); ++i) {
    const Layer& layer = contract.layers[i];
    const PerilGroup& group = contract.grouping.groups.at(layer.group);
    std::shared_ptr<const std::vector<Currency>> raw;
    try {
      raw = fetch ? fetch(group, layer)
                  : std::make_shared<const std::vector<Currency>>(
                        uncapped_layer_recovery(store, group, layer.attachment, layer.limit));
    } catch (const GridError& e) {
      throw GridError("layer " + std::to_string(i) + " (group " + std::to_string(layer.group) +
                      "): " + e.what());
    }
    auto& lr = res.layers[i];
    const double cap = (1.0 + layer.reinstatements) * layer.limit;
    lr.recovery.resize(years);
    for (YearIndex t = 0; t < years; ++t) lr.recovery[t] = std::min(cap, (*raw)[t]);
    lr.avg_recovery = average(lr.recovery);
    lr.premium = reinsurance_premium(layer.limit, lr.avg_recovery, pricing,
                                     pricing.curve_for(group, store.peril_names()));
    lr.reinstatement_premium.resize(years);
    for (YearIndex t = 0; t < years; ++t) {
      lr.reinstatement_premium[t] =
          reinstatement_premium(layer.limit, layer.reinstatements, lr.recovery[t], lr.premium);
    }
    res.total_premium += lr.premium;
  }

  res.retained = res.gross;
  res.net_loss = res.gross;
  for (const auto& lr : res.layers) {
    for (YearIndex t = 0; t < years; ++t) {
      res.retained[t] -= lr.recovery[t];
      res.net_loss[t] -= lr.recovery[t] - lr.reinstatement_premium[t];
    }
  }
  res.net_profit.resize(years);
  for (YearIndex t = 0; t < years; ++t) {
    res.net_profit[t] = pricing.gross_profit - res.net_loss[t] - res.total_premium;
  }
  res.avg_net_profit = average(res.net_profit);
  return res;
}

}  // namespace catxl
