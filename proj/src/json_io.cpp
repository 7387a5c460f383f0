#include "catxl/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace catxl {

namespace {

PerilId peril_id(const std::string& name, const std::vector<std::string>& names) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError("unknown peril '" + name + "'");
  return static_cast<PerilId>(it - names.begin());
}

std::vector<PerilId> peril_list(const Json& j, const std::vector<std::string>& names) {
  if (!j.is_array()) throw ValidationError("expected a list of peril names");
  std::vector<PerilId> out;
  for (const auto& n : j) out.push_back(peril_id(n.get<std::string>(), names));
  return out;
}

PricingCurve curve_from_json(const Json& j, double rol_min) {
  PricingCurve c;
  c.rol_min = rol_min;
  const Json& pts = j.is_object() ? j.at("points") : j;
  if (j.is_object() && j.contains("rol_min")) c.rol_min = j.at("rol_min").get<double>();
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != 2) throw ValidationError("curve points are [lol, rol] pairs");
    c.points.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  c.validate();
  return c;
}

Json curve_to_json(const PricingCurve& c) {
  Json pts = Json::array();
  for (const auto& [x, y] : c.points) pts.push_back({x, y});
  return {{"rol_min", c.rol_min}, {"points", pts}};
}

std::vector<Currency> number_list(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected a list of numbers");
  std::vector<Currency> v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

// Either a list of values or {"step": s, "max": hi}.
std::vector<Currency> grid_from_json(const Json& j) {
  if (j.is_object()) {
    return arithmetic_grid(j.at("step").get<double>(), j.at("max").get<double>());
  }
  return number_list(j);
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

PerilGrouping grouping_from_json(const Json& j, const std::vector<std::string>& names) {
  const Json& groups = j.is_object() ? j.at("groups") : j;
  if (!groups.is_array()) throw ValidationError("grouping must be a list of groups");
  PerilGrouping g;
  for (const auto& gj : groups) {
    PerilGroup group;
    if (gj.is_array()) {
      group.subgroups.push_back({peril_list(gj, names), 0.0});
    } else {
      for (const auto& sj : gj.at("subgroups")) {
        group.subgroups.push_back({peril_list(sj.at("perils"), names), sj.value("shift", 0.0)});
      }
    }
    g.groups.push_back(std::move(group));
  }
  g.validate(names.size());
  return g;
}

Json to_json(const PerilGrouping& g, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (const auto& group : g.groups) {
    const bool plain = group.subgroups.size() == 1 && group.subgroups[0].shift == 0.0;
    if (plain) {
      Json list = Json::array();
      for (auto p : group.subgroups[0].perils) list.push_back(names.at(p));
      out.push_back(list);
      continue;
    }
    Json subs = Json::array();
    for (const auto& s : group.subgroups) {
      Json list = Json::array();
      for (auto p : s.perils) list.push_back(names.at(p));
      subs.push_back({{"perils", list}, {"shift", s.shift}});
    }
    out.push_back({{"subgroups", subs}});
  }
  return out;
}

Contract contract_from_json(const Json& j, const std::vector<std::string>& names) {
  try {
    Contract c;
    c.grouping = j.contains("grouping") ? grouping_from_json(j.at("grouping"), names)
                                        : PerilGrouping::singletons(names.size());
    if (j.contains("layers")) {
      for (const auto& lj : j.at("layers")) {
        Layer l;
        l.attachment = lj.at("attachment").get<double>();
        l.limit = lj.at("limit").get<double>();
        l.reinstatements = lj.value("reinstatements", 0u);
        const auto& g = lj.contains("group") ? lj.at("group") : Json(0);
        if (g.is_string()) {
          const auto group = c.grouping.group_of(peril_id(g.get<std::string>(), names));
          if (!group) throw ValidationError("peril '" + g.get<std::string>() + "' has no group");
          l.group = *group;
        } else {
          l.group = g.get<GroupId>();
        }
        c.layers.push_back(l);
      }
    }
    c.validate(names.size());
    c.canonicalize();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("contract: ") + e.what());
  }
}

Json to_json(const Contract& c, const std::vector<std::string>& names) {
  Json layers = Json::array();
  for (const auto& l : c.layers) {
    layers.push_back({{"group", l.group},
                      {"attachment", l.attachment},
                      {"limit", l.limit},
                      {"reinstatements", l.reinstatements}});
  }
  return {{"grouping", to_json(c.grouping, names)}, {"layers", layers}};
}

Pricing pricing_from_json(const Json& j) {
  try {
    Pricing p;
    const auto mode = j.value("mode", std::string("expected_value"));
    if (mode == "expected_value") {
      p.mode = PricingMode::expected_value;
    } else if (mode == "curve") {
      p.mode = PricingMode::curve;
    } else {
      throw ValidationError("pricing mode must be expected_value or curve, got '" + mode + "'");
    }
    p.rho = j.value("rho", p.rho);
    p.rol_min = j.value("rol_min", p.rol_min);
    p.gross_profit = j.value("gross_profit", p.gross_profit);
    if (j.contains("curve")) p.curve = curve_from_json(j.at("curve"), p.rol_min);
    if (j.contains("peril_curves")) {
      for (const auto& [name, cj] : j.at("peril_curves").items()) {
        p.peril_curves.emplace(name, curve_from_json(cj, p.rol_min));
      }
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("pricing: ") + e.what());
  }
}

Json to_json(const Pricing& p) {
  Json j = {{"mode", p.mode == PricingMode::curve ? "curve" : "expected_value"},
            {"rho", p.rho},
            {"rol_min", p.rol_min},
            {"gross_profit", p.gross_profit}};
  if (p.curve) j["curve"] = curve_to_json(*p.curve);
  if (!p.peril_curves.empty()) {
    Json pc = Json::object();
    for (const auto& [name, c] : p.peril_curves) pc[name] = curve_to_json(c);
    j["peril_curves"] = pc;
  }
  return j;
}

std::vector<ConstraintSpec> constraints_from_json(const Json& j) {
  try {
    const Json& list = j.is_object() ? j.at("constraints") : j;
    if (!list.is_array()) throw ValidationError("constraints must be a list");
    std::vector<ConstraintSpec> out;
    for (const auto& cj : list) {
      ConstraintSpec c;
      c.kind = constraint_kind_from_string(cj.at("kind").get<std::string>());
      if (cj.contains("return_period")) {
        c.beta = beta_from_return_period(cj.at("return_period").get<double>());
      } else {
        c.beta = cj.value("beta", c.beta);
      }
      c.peril = cj.value("peril", std::string());
      c.threshold = cj.at("threshold").get<double>();
      if (cj.contains("penalty_scale")) c.penalty_scale = cj.at("penalty_scale").get<double>();
      c.validate();
      out.push_back(std::move(c));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("constraints: ") + e.what());
  }
}

StateSpaceBounds bounds_from_json(const Json& j, const std::vector<std::string>& names,
                                  StateSpaceBounds b) {
  try {
    if (j.contains("boundary_grid")) b.boundary_grid = grid_from_json(j.at("boundary_grid"));
    if (j.contains("group_grids")) {
      b.group_grids.clear();
      for (const auto& [name, gj] : j.at("group_grids").items()) {
        peril_id(name, names);
        b.group_grids[name] = grid_from_json(gj);
      }
    }
    b.min_layers = j.value("min_layers", b.min_layers);
    b.max_layers = j.value("max_layers", b.max_layers);
    b.max_reinstatements = j.value("max_reinstatements", b.max_reinstatements);
    b.min_layer_size = j.value("min_layer_size", b.min_layer_size);
    if (j.contains("shift_grid")) b.shift_grid = number_list(j.at("shift_grid"));
    b.allow_subgroups = j.value("allow_subgroups", b.allow_subgroups);
    if (j.contains("groupings")) {
      b.groupings.clear();
      for (const auto& gj : j.at("groupings")) b.groupings.push_back(grouping_from_json(gj, names));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bounds: ") + e.what());
  }
}

GroupMap group_map_from_json(const Json& j, const std::vector<std::string>& names) {
  try {
    const auto grouping = grouping_from_json(j, names);
    return grouping.group_map(names.size());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("grouping: ") + e.what());
  }
}

Json to_json(const RiskReport& r, const std::vector<std::string>& names) {
  Json aep = Json::array();
  for (const auto& [beta, v] : r.aep) aep.push_back({{"beta", beta}, {"value", v}});
  Json oep = Json::array();
  for (const auto& o : r.oep) {
    oep.push_back({{"beta", o.beta}, {"peril", names.at(o.peril)}, {"value", o.value}});
  }
  Json cons = Json::array();
  for (const auto& c : r.constraints) {
    Json cj = {{"label", c.spec.label()},
               {"kind", to_string(c.spec.kind)},
               {"beta", c.spec.beta},
               {"threshold", c.spec.threshold},
               {"value", c.value},
               {"penalty", c.penalty},
               {"satisfied", c.satisfied}};
    if (!c.spec.peril.empty()) cj["peril"] = c.spec.peril;
    cons.push_back(cj);
  }
  return {{"objective", r.objective},
          {"feasible", r.feasible},
          {"avg_net_profit", r.avg_net_profit},
          {"tvar", r.tvar},
          {"aep", aep},
          {"oep", oep},
          {"attach_prob", r.attach_prob},
          {"constraints", cons}};
}

Json to_json(const BnbProblem& p, const BnbResult& r) {
  Json layers = Json::array();
  if (r.feasible) {
    for (std::size_t g = 0; g < p.n(); ++g) {
      const auto& grp = p.groups[g];
      const auto c = r.assignment[g];
      layers.push_back({{"group", grp.name},
                        {"candidate", c},
                        {"attachment", grp.attachments[c / p.side()]},
                        {"limit", grp.limit(c)},
                        {"profit", from_units(grp.profit[c])}});
    }
  }
  Json groups = Json::array();
  for (const auto& g : p.groups) {
    groups.push_back(
        {{"name", g.name}, {"a_min", g.a_min}, {"a_max", g.a_max}, {"l_max", g.l_max}});
  }
  Json suffixes = Json::array();
  for (const auto& s : r.suffixes) {
    suffixes.push_back({{"start", s.start},
                        {"pimax", s.pimax == kNoProfit ? Json(nullptr) : Json(from_units(s.pimax))},
                        {"assignment", s.assignment},
                        {"nodes", s.nodes}});
  }
  return {{"feasible", r.feasible},
          {"objective", r.feasible ? Json(r.objective) : Json(nullptr)},
          {"risk", {{"kind", p.risk == BnbRiskKind::tvar ? "tvar" : "aep"},
                    {"beta", p.beta},
                    {"k_max", finite_or_null(p.k_max)},
                    {"value", r.risk},
                    {"min_value", r.min_risk}}},
          {"groups", groups},
          {"layers", layers},
          {"stats", {{"nodes_visited", r.stats.nodes_visited},
                     {"nodes_pruned_by_profit", r.stats.nodes_pruned_by_profit},
                     {"nodes_pruned_by_risk", r.stats.nodes_pruned_by_risk},
                     {"cascade_nodes", r.stats.cascade_nodes},
                     {"exhaustive_leaf_count", r.stats.exhaustive_leaf_count},
                     {"exhaustive_tree_nodes", r.stats.exhaustive_tree_nodes},
                     {"reduction_factor", r.stats.reduction_factor}}},
          {"suffixes", suffixes}};
}

Json to_json(const CrossoverReport& r, const HardwareModel& m) {
  return {{"model", {{"toffoli_rate", m.toffoli_rate},
                     {"ands_per_add", m.ands_per_add},
                     {"classical_ops", m.classical_ops},
                     {"budget_seconds", m.budget_seconds}}},
          {"t_q", r.t_q},
          {"t_c", r.t_c},
          {"t_ratio", r.t_ratio},
          {"min_tree_size", r.min_tree_size},
          {"max_ops_per_oracle", r.max_ops_per_oracle}};
}

}  // namespace catxl
