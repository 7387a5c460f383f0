#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

namespace oracle {

namespace {

struct Membership {
  catxl::GroupId group;
  Currency shift;
};

std::vector<std::optional<Membership>> memberships(const catxl::Contract& c, std::size_t perils) {
  std::vector<std::optional<Membership>> m(perils);
  for (catxl::GroupId g = 0; g < c.grouping.groups.size(); ++g) {
    for (const auto& s : c.grouping.groups[g].subgroups) {
      for (auto p : s.perils) m[p] = Membership{g, s.shift};
    }
  }
  return m;
}

double event_rec(double loss, double a, double l) { return std::min(std::max(0.0, loss - a), l); }

// Piecewise linear rate on line, written out from the definition.
double rate_on_line(const catxl::PricingCurve& c, double lol) {
  const auto& pts = c.points;
  if (lol < pts.front().first) return c.rol_min;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (lol <= pts[i].first || i + 1 == pts.size()) {
      const double w = (lol - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
      return pts[i - 1].second + w * (pts[i].second - pts[i - 1].second);
    }
  }
  return pts.back().second;
}

const catxl::PricingCurve* curve_of(const catxl::Pricing& pricing, const catxl::PerilGroup& group,
                                    const std::vector<std::string>& names) {
  auto perils = group.perils();
  std::sort(perils.begin(), perils.end());
  for (auto p : perils) {
    auto it = pricing.peril_curves.find(names[p]);
    if (it != pricing.peril_curves.end()) return &it->second;
  }
  return pricing.curve ? &*pricing.curve : nullptr;
}

}  // namespace

Yearly evaluate(const catxl::EventLossTable& table, const catxl::Contract& contract,
                const catxl::Pricing& pricing) {
  const std::size_t years = table.num_trial_years();
  const auto member = memberships(contract, table.num_perils());
  Yearly y;
  y.gross.assign(years, 0.0);
  for (const auto& e : table.events()) y.gross[e.trial_year] += e.loss;

  for (const auto& layer : contract.layers) {
    std::vector<double> rec(years, 0.0);
    for (const auto& e : table.events()) {
      const auto& m = member[e.peril];
      if (!m || m->group != layer.group) continue;
      rec[e.trial_year] += event_rec(e.loss, layer.attachment + m->shift, layer.limit);
    }
    const double cap = (1.0 + layer.reinstatements) * layer.limit;
    for (auto& r : rec) r = std::min(r, cap);
    const double avg = std::accumulate(rec.begin(), rec.end(), 0.0) / static_cast<double>(years);
    double premium;
    if (pricing.mode == catxl::PricingMode::expected_value) {
      premium = (1.0 + pricing.rho) * avg;
    } else {
      const auto* c = curve_of(pricing, contract.grouping.groups[layer.group], table.peril_names());
      catxl::PricingCurve lin;
      lin.rol_min = pricing.rol_min;
      lin.points = {{0.0, pricing.rol_min}, {1.0, pricing.rol_min + 1.0 + pricing.rho}};
      premium = layer.limit * rate_on_line(c ? *c : lin, avg / layer.limit);
    }
    std::vector<double> rstm(years, 0.0);
    if (layer.reinstatements > 0) {
      for (std::size_t t = 0; t < years; ++t) {
        rstm[t] = premium * std::min(layer.reinstatements * layer.limit, rec[t]) / layer.limit;
      }
    }
    y.recovery.push_back(std::move(rec));
    y.reinstatement.push_back(std::move(rstm));
    y.avg_recovery.push_back(avg);
    y.premium.push_back(premium);
  }

  const double total_premium = std::accumulate(y.premium.begin(), y.premium.end(), 0.0);
  y.net_loss = y.gross;
  y.net_profit.resize(years);
  for (std::size_t t = 0; t < years; ++t) {
    for (std::size_t l = 0; l < contract.layers.size(); ++l) {
      y.net_loss[t] -= y.recovery[l][t] - y.reinstatement[l][t];
    }
    y.net_profit[t] = pricing.gross_profit - y.net_loss[t] - total_premium;
  }
  y.avg_net_profit =
      std::accumulate(y.net_profit.begin(), y.net_profit.end(), 0.0) / static_cast<double>(years);
  return y;
}

double percentile(std::vector<double> v, double beta) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(beta * n - 1e-9)));
  rank = std::min(rank, v.size());
  return v[rank - 1];
}

double tvar(std::vector<double> v, double beta) {
  const double p = percentile(v, beta);
  double sum = 0.0;
  int count = 0;
  for (double x : v) {
    if (x > p) {
      sum += x;
      ++count;
    }
  }
  return count == 0 ? p : sum / count;
}

std::vector<double> net_max_event(const catxl::EventLossTable& table,
                                  const catxl::Contract& contract, catxl::PerilId p) {
  const auto member = memberships(contract, table.num_perils());
  std::vector<double> out(table.num_trial_years(), 0.0);
  for (const auto& e : table.events()) {
    if (e.peril != p) continue;
    double net = e.loss;
    if (member[p]) {
      for (const auto& layer : contract.layers) {
        if (layer.group != member[p]->group) continue;
        net -= event_rec(e.loss, layer.attachment + member[p]->shift, layer.limit);
      }
    }
    out[e.trial_year] = std::max(out[e.trial_year], net);
  }
  return out;
}

double attach_prob(const std::vector<double>& recovery) {
  const auto hits = std::count_if(recovery.begin(), recovery.end(), [](double r) { return r > 0; });
  return static_cast<double>(hits) / static_cast<double>(recovery.size());
}

catxl::EventLossTable random_table(std::mt19937_64& rng, std::uint32_t max_years,
                                   std::size_t max_events, std::size_t perils, int max_loss) {
  const auto years = std::uniform_int_distribution<std::uint32_t>(1, max_years)(rng);
  const auto count = std::uniform_int_distribution<std::size_t>(0, max_events)(rng);
  std::uniform_int_distribution<std::uint32_t> year(0, years - 1);
  std::uniform_int_distribution<std::uint32_t> peril(0, static_cast<std::uint32_t>(perils - 1));
  std::uniform_int_distribution<int> loss(1, max_loss);
  std::vector<catxl::LossEvent> events;
  for (std::size_t i = 0; i < count; ++i) {
    events.push_back({year(rng), peril(rng), static_cast<double>(loss(rng))});
  }
  std::vector<std::string> names;
  for (std::size_t p = 0; p < perils; ++p) names.push_back("P" + std::to_string(p));
  return catxl::EventLossTable(years, std::move(names), std::move(events));
}

std::vector<Currency> integer_grid(int hi) {
  std::vector<Currency> g;
  for (int i = 1; i <= hi; ++i) g.push_back(i);
  return g;
}

catxl::Contract random_contract(std::mt19937_64& rng, const catxl::PerilGrouping& grouping, int lo,
                                int hi, std::uint32_t max_reinstatements) {
  catxl::Contract c;
  c.grouping = grouping;
  std::uniform_int_distribution<int> layers(0, 3);
  std::uniform_int_distribution<std::uint32_t> reinst(0, max_reinstatements);
  for (catxl::GroupId g = 0; g < grouping.groups.size(); ++g) {
    const int k = layers(rng);
    std::vector<int> cuts;
    for (int i = 0; i <= k; ++i) cuts.push_back(std::uniform_int_distribution<int>(lo, hi)(rng));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      c.layers.push_back({static_cast<double>(cuts[i]), static_cast<double>(cuts[i + 1] - cuts[i]),
                          reinst(rng), g});
    }
  }
  c.canonicalize();
  return c;
}

catxl::PerilGrouping random_grouping(std::mt19937_64& rng, std::size_t perils) {
  std::vector<std::vector<catxl::PerilId>> parts;
  for (catxl::PerilId p = 0; p < perils; ++p) {
    const auto k = std::uniform_int_distribution<std::size_t>(0, parts.size())(rng);
    if (k == parts.size()) {
      parts.push_back({p});
    } else {
      parts[k].push_back(p);
    }
  }
  auto g = catxl::PerilGrouping::from_partition(parts);
  g.canonicalize();
  return g;
}

bool bnb_within(const catxl::BnbProblem& p, std::vector<std::int64_t> net) {
  using Wide = __int128;
  std::sort(net.begin(), net.end());
  const auto n = net.size();
  auto rank = static_cast<std::size_t>(std::ceil(p.beta * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  const auto pct = net[rank - 1];
  if (p.risk == catxl::BnbRiskKind::aep) return pct <= p.k_max_units;
  Wide sum = 0;
  Wide count = 0;
  for (auto v : net) {
    if (v > pct) {
      sum += v;
      ++count;
    }
  }
  if (count == 0) return pct <= p.k_max_units;
  return sum <= Wide{p.k_max_units} * count;
}

BnbBest bnb_enumerate(const catxl::BnbProblem& p) {
  BnbBest best;
  const auto c = p.candidates();
  std::vector<std::size_t> a(p.n(), 0);
  std::vector<std::int64_t> net(p.years);
  for (;;) {
    net = p.gross;
    std::int64_t profit = 0;
    for (std::size_t g = 0; g < p.n(); ++g) {
      const auto& r = p.groups[g].recovery[a[g]];
      for (std::size_t t = 0; t < p.years; ++t) net[t] -= r[t];
      profit += p.groups[g].profit[a[g]];
    }
    if ((!best.feasible || profit > best.objective) && bnb_within(p, net)) best = {true, profit};
    std::size_t g = 0;
    while (g < p.n() && ++a[g] == c) a[g++] = 0;
    if (g == p.n()) break;
  }
  return best;
}

}  // namespace oracle
