#include "catxl/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "catxl/json_io.hpp"

namespace catxl::cli {

namespace fs = std::filesystem;

namespace {

// Raised for flag combinations CLI11 cannot express.
struct UsageError : Error {
  using Error::Error;
};

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void ensure_parent(const fs::path& p) {
  const auto parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory '" + parent.string() + "' does not exist");
  }
}

struct Common {
  unsigned threads = 1;
  bool quiet = false;
};

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  SyntheticSpec spec;
  std::string out;
};

int run_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err, const Common& c) {
  ensure_parent(a.out);
  const auto table = generate_synthetic(a.spec);
  save_events(table, a.out, event_format_from_path(a.out));
  if (!c.quiet) err << "wrote " << table.size() << " events to " << a.out << "\n";
  out << dump({{"events", table.size()},
               {"years", table.num_trial_years()},
               {"perils", table.peril_names()},
               {"seed", a.spec.seed},
               {"out", a.out}});
  return kExitOk;
}

// ---- preprocess -----------------------------------------------------------

struct PreprocessArgs {
  std::string in;
  std::string grouping;
  double p_attach = 0.1;
  std::size_t grid = 80;
  double grid_step = 0.0;
  std::uint32_t years = 0;
  std::string out;
};

int run_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err,
                   const Common& c) {
  ensure_parent(a.out);
  const auto table = load_events(a.in, event_format_from_path(a.in),
                                 a.years > 0 ? std::optional<std::uint32_t>(a.years)
                                             : std::nullopt);
  if (table.empty()) throw ValidationError("'" + a.in + "' holds no events");
  const auto groups = a.grouping.empty() ? GroupMap::identity(table.num_perils())
                                         : group_map_from_json(read_json(a.grouping),
                                                               table.peril_names());
  if (!(a.p_attach > 0.0 && a.p_attach < 1.0)) throw UsageError("--p-attach must lie in (0, 1)");
  const auto a_min = compute_min_attachments(table, groups, a.p_attach);
  auto compressed = compress(table, groups, a_min);

  // One grid shared by every peril so that a layer can move between groups.
  Currency lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& e : table.events()) {
    if (e.loss > 0.0) lo = std::min(lo, e.loss);
    hi = std::max(hi, e.loss);
  }
  if (!(hi > 0.0)) throw ValidationError("'" + a.in + "' holds no positive losses");
  // The grid starts at the lowest floor; nothing below it can be used.
  Currency start = hi;
  for (Currency m : a_min) start = std::min(start, m > 0.0 ? m : lo);
  lo = start;
  std::vector<Currency> grid = a.grid_step > 0.0
                                   ? arithmetic_grid(a.grid_step, hi + a.grid_step)
                                   : geometric_round_grid(lo, hi, a.grid);
  grid = merge_grids(std::move(grid), a_min);
  // Each peril keeps the part of the grid at or above its group's floor.
  std::vector<std::vector<Currency>> thresholds(table.num_perils());
  std::vector<Currency> floor(table.num_perils());
  for (PerilId p = 0; p < table.num_perils(); ++p) {
    floor[p] = a_min[groups.group_of[p]];
    for (Currency x : grid) {
      if (x >= floor[p] - kCurrencyTolerance) thresholds[p].push_back(x);
    }
  }
  const auto store =
      CumulativeLossStore::build(compressed.table, std::move(thresholds), compressed.base_loss,
                                 compressed.base_max, floor);
  store.save(a.out);

  const auto& rep = compressed.report;
  if (!c.quiet) {
    err << "compressed " << rep.events_before << " -> " << rep.events_after << " events ("
        << num(rep.reduction_factor) << "x); grid of " << grid.size() << " thresholds\n";
  }
  Json groups_json = Json::array();
  for (GroupId g = 0; g < groups.num_groups; ++g) {
    Json names = Json::array();
    for (PerilId p = 0; p < table.num_perils(); ++p) {
      if (groups.group_of[p] == g) names.push_back(table.peril_name(p));
    }
    groups_json.push_back({{"perils", names}, {"min_attachment", rep.min_attachment[g]}});
  }
  out << dump({{"events_before", rep.events_before},
               {"events_after", rep.events_after},
               {"reduction_factor", std::isfinite(rep.reduction_factor)
                                        ? Json(rep.reduction_factor)
                                        : Json(nullptr)},
               {"years", store.num_years()},
               {"groups", groups_json},
               {"thresholds", grid.size()},
               {"out", a.out}});
  return kExitOk;
}

// ---- shared: pricing and constraints ----------------------------------------

struct PricingArgs {
  std::string file;
  std::string mode;
  double rho = 0.1;
};

Pricing load_pricing(const PricingArgs& a) {
  Pricing p;
  if (!a.file.empty()) {
    p = pricing_from_json(read_json(a.file));
  } else {
    p.rho = a.rho;
  }
  if (a.mode == "curve") {
    if (a.file.empty()) throw UsageError("--pricing FILE is required with --pricing-mode curve");
    p.mode = PricingMode::curve;
  } else if (a.mode == "expected_value") {
    p.mode = PricingMode::expected_value;
  }
  p.validate();
  return p;
}

// Without a constraints file: TVaR at 0.995 below 90% of the gross TVaR.
std::vector<ConstraintSpec> load_constraints(const std::string& file,
                                             const CumulativeLossStore& store,
                                             const Pricing& pricing) {
  if (!file.empty()) return constraints_from_json(read_json(file));
  Evaluator plain(store, pricing, {}, {}, CacheConfig{false, 0, 0});
  ConstraintSpec c;
  c.kind = ConstraintKind::tvar;
  c.beta = 0.995;
  c.threshold = 0.9 * plain.baseline().tvar;
  return {c};
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string contract;
  std::string store;
  PricingArgs pricing;
  std::string constraints;
  std::string out;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&, const Common&) {
  const auto pricing = load_pricing(a.pricing);
  if (!a.out.empty()) ensure_parent(a.out);
  const auto store = CumulativeLossStore::load(a.store);
  const auto contract = contract_from_json(read_json(a.contract), store.peril_names());
  std::vector<ConstraintSpec> constraints;
  if (!a.constraints.empty()) constraints = constraints_from_json(read_json(a.constraints));
  Evaluator ev(store, pricing, constraints);
  const auto report = ev.evaluate(contract);
  Json j = {{"contract", to_json(contract, store.peril_names())},
            {"report", to_json(report, store.peril_names())},
            {"baseline", to_json(ev.baseline(), store.peril_names())}};
  if (!a.out.empty()) write_text(a.out, dump(j));
  out << dump(j);
  return report.feasible ? kExitOk : kExitInfeasible;
}

// ---- optimize -------------------------------------------------------------

struct OptimizeArgs {
  std::string store;
  PricingArgs pricing;
  std::string constraints;
  std::string bounds;
  std::string start;
  AnnealSchedule schedule;
  std::size_t keep_best = 10;
  std::size_t space_every = 1;
  std::size_t max_layers = 0;
  bool no_cache = false;
  std::string out_dir = ".";
};

int run_optimize(const OptimizeArgs& a, std::ostream& out, std::ostream& err, const Common& c) {
  const auto pricing = load_pricing(a.pricing);
  if (!fs::is_directory(a.out_dir)) fs::create_directories(a.out_dir);
  const auto store = CumulativeLossStore::load(a.store);
  const auto& names = store.peril_names();
  auto bounds = default_bounds(store);
  if (!a.bounds.empty()) bounds = bounds_from_json(read_json(a.bounds), names, bounds);
  if (a.max_layers > 0) bounds.max_layers = a.max_layers;
  bounds.validate(store);
  std::vector<Contract> starts;
  if (!a.start.empty()) starts.push_back(contract_from_json(read_json(a.start), names));
  const auto constraints = load_constraints(a.constraints, store, pricing);
  Evaluator ev(store, pricing, constraints, {}, CacheConfig{!a.no_cache, 4096, 4096});

  const fs::path dir(a.out_dir);
  std::ofstream trace(dir / "trace.csv", std::ios::binary);
  std::ofstream space(dir / "space.csv", std::ios::binary);
  if (!trace || !space) throw ConfigError("cannot write into '" + a.out_dir + "'");
  trace << "step,objective,temperature,move,accepted,chain,best\n";
  space << "chain,step,tvar,profit,feasible\n";
  trace.flush();
  space.flush();

  AnnealOptions opt;
  opt.keep_best = a.keep_best;
  opt.space_every = a.space_every;
  opt.threads = c.threads;
  auto sink = [&](std::size_t chain, const ChainOutput& o) {
    for (const auto& r : o.trace) {
      trace << r.step << ',' << num(r.objective) << ',' << num(r.temperature) << ','
            << to_string(r.move) << ',' << (r.accepted ? 1 : 0) << ',' << r.chain << ','
            << num(r.best) << '\n';
    }
    for (std::size_t i = 0; i < o.space.size(); ++i) {
      const auto& s = o.space[i];
      space << chain << ',' << i * a.space_every << ',' << num(s.tvar) << ',' << num(s.profit)
            << ',' << (s.feasible ? 1 : 0) << '\n';
    }
    trace.flush();
    space.flush();
    if (!c.quiet) {
      const double best = o.trace.empty() ? -std::numeric_limits<double>::infinity()
                                          : o.trace.back().best;
      err << "chain " << chain << " finished, best objective " << num(best) << "\n";
    }
  };
  const auto result = anneal(ev, bounds, a.schedule, starts, opt, sink);

  Json best = Json::array();
  for (std::size_t i = 0; i < result.best.size(); ++i) {
    best.push_back({{"rank", i + 1},
                    {"contract", to_json(result.best[i].contract, names)},
                    {"report", to_json(result.best[i].report, names)}});
  }
  Json j = {{"seed", a.schedule.seed},
            {"steps", a.schedule.steps},
            {"restarts", a.schedule.restarts},
            {"baseline", to_json(ev.baseline(), names)},
            {"best", best},
            {"cache", {{"layer_hits", result.cache.layer_hits},
                       {"layer_misses", result.cache.layer_misses},
                       {"contract_hits", result.cache.contract_hits},
                       {"contract_misses", result.cache.contract_misses}}}};
  write_text(dir / "best.json", dump(j));
  out << dump(result.best.empty() ? Json{{"found", false}} : best.front());
  return result.best.empty() ? kExitInfeasible : kExitOk;
}

// ---- solve and census -----------------------------------------------------

struct ProblemArgs {
  double rho = 0.1;
  double p_attach = 0.1;
  std::string risk = "tvar";
  double beta = 0.995;
  std::string kmax = "AUTO";
  double kmax_factor = 0.9;
  std::uint32_t years = 1000;
  std::uint32_t events_per_year = 50;
  double scale = 1.2;
  bool constant_scale = false;
};

BnbConfig problem_config(const ProblemArgs& a) {
  BnbConfig cfg;
  cfg.rho = a.rho;
  cfg.p_attach = a.p_attach;
  if (a.risk == "tvar") {
    cfg.risk = BnbRiskKind::tvar;
  } else if (a.risk == "aep") {
    cfg.risk = BnbRiskKind::aep;
  } else {
    throw UsageError("--risk must be tvar or aep");
  }
  cfg.beta = a.beta;
  cfg.k_max_factor = a.kmax_factor;
  if (a.kmax != "AUTO" && a.kmax != "auto") {
    double v = 0.0;
    const auto* end = a.kmax.data() + a.kmax.size();
    auto [ptr, ec] = std::from_chars(a.kmax.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      if (a.kmax == "inf") {
        v = std::numeric_limits<double>::infinity();
      } else {
        throw UsageError("--kmax must be AUTO, inf or a number, got '" + a.kmax + "'");
      }
    }
    cfg.k_max = v;
  }
  return cfg;
}

SyntheticSpec synthetic_spec(const ProblemArgs& a) {
  SyntheticSpec s;
  s.years = a.years;
  s.events_per_year = a.events_per_year;
  s.scale_base = a.scale;
  s.constant_scale = a.constant_scale;
  return s;
}

struct SolveArgs {
  ProblemArgs problem;
  std::size_t groups = 0;
  std::size_t bits = 1;
  std::uint64_t seed = 0;
  bool synthetic = false;
  std::string store;
  std::string method = "cascade";
  std::string out;
};

int run_solve(const SolveArgs& a, std::ostream& out, std::ostream& err, const Common& c) {
  if (a.store.empty() && a.groups == 0) {
    throw UsageError("solve needs --groups N (synthetic data) or --store STORE");
  }
  if (!a.store.empty() && a.synthetic) throw UsageError("--synthetic and --store exclude each other");
  if (!a.out.empty()) ensure_parent(a.out);
  auto cfg = problem_config(a.problem);
  cfg.bits = a.bits;
  BnbProblem problem;
  if (!a.store.empty()) {
    const auto store = CumulativeLossStore::load(a.store);
    cfg.groups = store.num_perils();
    problem = make_store_problem(store, cfg);
  } else {
    cfg.groups = a.groups;
    auto spec = synthetic_spec(a.problem);
    spec.num_groups = static_cast<std::uint32_t>(a.groups);
    spec.seed = a.seed;
    problem = make_synthetic_problem(spec, cfg);
  }
  BnbResult r;
  if (a.method == "cascade") {
    r = solve_cascade(problem);
  } else if (a.method == "recursive") {
    r = recursive_bound_solve(problem);
  } else if (a.method == "brute") {
    r = brute_force_solve(problem);
  } else {
    throw UsageError("--method must be cascade, recursive or brute");
  }
  Json j = to_json(problem, r);
  j["method"] = a.method;
  j["seed"] = a.seed;
  if (!a.out.empty()) write_text(a.out, dump(j));
  out << dump(j);
  if (!c.quiet) {
    err << (r.feasible ? "optimum " + num(r.objective) : std::string("infeasible")) << " after "
        << r.stats.nodes_visited << " nodes (" << r.stats.cascade_nodes << " with suffixes)\n";
  }
  return r.feasible ? kExitOk : kExitInfeasible;
}

struct CensusArgs {
  ProblemArgs problem;
  std::vector<std::size_t> bits{1, 2, 3};
  std::size_t n_max = 16;
  std::size_t instances = 10;
  std::uint64_t seed = 0;
  bool timing = false;
  std::string out;
};

int run_census(const CensusArgs& a, std::ostream& out, std::ostream& err, const Common& c) {
  if (!a.out.empty()) ensure_parent(a.out);
  CensusConfig cfg;
  cfg.bits = a.bits;
  cfg.n_max = a.n_max;
  cfg.instances = a.instances;
  cfg.seed = a.seed;
  cfg.threads = c.threads;
  cfg.synthetic = synthetic_spec(a.problem);
  cfg.problem = problem_config(a.problem);
  auto progress = [&](const CensusRow& r) {
    if (!c.quiet) {
      err << "n=" << r.n << " b=" << r.b << " instance=" << r.instance
          << " nodes=" << r.nodes_visited << "\n";
    }
  };
  const auto result = catxl::run_census(cfg, progress);
  std::ostringstream csv;
  csv << "n,b,instance,seed,nodes_visited,cascade_nodes,reduction_factor,feasible"
      << (a.timing ? ",seconds" : "") << "\n";
  for (const auto& r : result.rows) {
    csv << r.n << ',' << r.b << ',' << r.instance << ',' << r.seed << ',' << r.nodes_visited
        << ',' << r.cascade_nodes << ',' << num(r.reduction_factor) << ','
        << (r.feasible ? 1 : 0);
    if (a.timing) csv << ',' << num(r.seconds);
    csv << '\n';
  }
  if (!a.out.empty()) write_text(a.out, csv.str());
  Json j = {{"rows", result.rows.size()},
            {"fit", {{"c1", result.fit.c1}, {"c0", result.fit.c0}, {"counter", "cascade_nodes"}}},
            {"fit_final",
             {{"c1", result.fit_final.c1}, {"c0", result.fit_final.c0},
              {"counter", "nodes_visited"}}}};
  if (a.out.empty()) j["csv"] = csv.str();
  out << dump(j);
  return kExitOk;
}

// ---- estimate-qbb ---------------------------------------------------------

struct QbbArgs {
  HardwareModel model;
  std::int64_t events = -1;
};

int run_qbb(const QbbArgs& a, std::ostream& out, std::ostream& err, const Common&) {
  const auto r = estimate(a.model);
  Json j = to_json(r, a.model);
  err << r.summary << "\n";
  int code = kExitOk;
  if (a.events >= 0) {
    const auto events = static_cast<std::uint64_t>(a.events);
    const auto v = oracle_verdict(events, r);
    j["events"] = events;
    j["oracle_cost_lower_bound"] = oracle_cost_lower_bound(events);
    j["verdict"] = to_string(v);
    err << "an oracle over " << events << " events needs at least "
        << oracle_cost_lower_bound(events) << " additions: " << to_string(v) << "\n";
    if (v == OracleVerdict::infeasible) code = kExitInfeasible;
  }
  out << dump(j);
  return code;
}

}  // namespace

std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  const auto j = read_json(path);
  if (!j.is_object()) throw UsageError("--config: '" + path + "' must hold a JSON object");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [](const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    if (v.is_number()) return num(v.get<double>());
    throw UsageError("--config: unsupported value " + v.dump());
  };
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
      args.push_back(flag);
      args.push_back(joined);
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Catastrophe excess-of-loss reinsurance structuring toolkit", "catxl"};
  app.set_version_flag("--version", std::string(CATXL_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "Worker threads for chains and census instances")
      ->check(CLI::Range(1u, 1024u));
  app.add_flag("--quiet", common.quiet, "Suppress progress output on stderr");
  app.add_option("--config", "JSON file whose keys supply flags not given on the command line");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic Pareto event-loss table");
  g->add_option("--groups", gen.spec.num_groups, "Peril groups")->required();
  g->add_option("--years", gen.spec.years, "Trial years");
  g->add_option("--events-per-year", gen.spec.events_per_year, "Events per year and group");
  g->add_option("--scale", gen.spec.scale_base, "Base of the per-group scale ladder");
  g->add_flag("--constant-scale", gen.spec.constant_scale, "Use the same scale for every group");
  g->add_option("--seed", gen.spec.seed, "Random seed");
  g->add_option("--out", gen.out, "Output file (.csv or .bin)")->required();

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Compress an event table and build the loss store");
  p->add_option("--in", pre.in, "Event table (.csv or .bin)")->required()->check(CLI::ExistingFile);
  p->add_option("--grouping", pre.grouping, "JSON peril grouping {\"groups\": [[names]]}")
      ->check(CLI::ExistingFile);
  p->add_option("--p-attach", pre.p_attach, "Maximum attachment probability");
  p->add_option("--grid", pre.grid, "Number of geometric round thresholds");
  p->add_option("--grid-step", pre.grid_step, "Use an evenly spaced grid with this step instead");
  p->add_option("--years", pre.years, "Trial years (default: largest year in the table + 1)");
  p->add_option("--out", pre.out, "Output store file")->required();

  auto add_pricing = [](CLI::App* sub, PricingArgs& pa) {
    sub->add_option("--pricing", pa.file, "Pricing JSON")->check(CLI::ExistingFile);
    sub->add_option("--pricing-mode", pa.mode, "expected_value or curve (overrides the file)")
        ->check(CLI::IsMember({"expected_value", "curve"}));
    sub->add_option("--rho", pa.rho, "Market factor when no pricing file is given");
  };

  EvaluateArgs eva;
  auto* e = app.add_subcommand("evaluate", "Evaluate one contract against a store");
  e->add_option("--contract", eva.contract, "Contract JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--store", eva.store, "Loss store")->required()->check(CLI::ExistingFile);
  add_pricing(e, eva.pricing);
  e->add_option("--constraints", eva.constraints, "Constraints JSON")->check(CLI::ExistingFile);
  e->add_option("--out", eva.out, "Also write the report here");

  OptimizeArgs opt;
  auto* o = app.add_subcommand("optimize", "Search contract space by simulated annealing");
  o->add_option("--store", opt.store, "Loss store")->required()->check(CLI::ExistingFile);
  add_pricing(o, opt.pricing);
  o->add_option("--constraints", opt.constraints, "Constraints JSON")->check(CLI::ExistingFile);
  o->add_option("--bounds", opt.bounds, "State-space bounds JSON")->check(CLI::ExistingFile);
  o->add_option("--start", opt.start, "Start contract JSON")->check(CLI::ExistingFile);
  o->add_option("--steps", opt.schedule.steps, "Steps per chain");
  o->add_option("--restarts", opt.schedule.restarts, "Independent chains");
  o->add_option("--t-initial", opt.schedule.t_initial, "Initial temperature");
  o->add_option("--t-final", opt.schedule.t_final, "Final temperature");
  o->add_option("--seed", opt.schedule.seed, "Random seed");
  o->add_option("--keep-best", opt.keep_best, "Contracts kept in best.json");
  o->add_option("--space-every", opt.space_every, "Record every k-th state in space.csv");
  o->add_option("--max-layers", opt.max_layers, "Maximum layers per tower");
  o->add_flag("--no-cache", opt.no_cache, "Disable the evaluation cache");
  o->add_option("--out-dir", opt.out_dir, "Directory for best.json, trace.csv, space.csv");

  auto add_problem = [](CLI::App* sub, ProblemArgs& pa) {
    sub->add_option("--rho", pa.rho, "Market factor");
    sub->add_option("--p-attach", pa.p_attach, "Maximum attachment probability");
    sub->add_option("--risk", pa.risk, "tvar or aep")->check(CLI::IsMember({"tvar", "aep"}));
    sub->add_option("--beta", pa.beta, "Risk level");
    sub->add_option("--kmax", pa.kmax, "Risk threshold: AUTO, inf or a number");
    sub->add_option("--kmax-factor", pa.kmax_factor, "AUTO threshold as a fraction of gross risk");
    sub->add_option("--years", pa.years, "Synthetic trial years");
    sub->add_option("--events-per-year", pa.events_per_year, "Synthetic events per year and group");
    sub->add_option("--scale", pa.scale, "Synthetic scale base");
    sub->add_flag("--constant-scale", pa.constant_scale, "Same scale for every group");
  };

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Exact branch and bound for one layer per group");
  add_problem(s, sol.problem);
  s->add_option("--groups", sol.groups, "Peril groups of the synthetic instance");
  s->add_option("--bits", sol.bits, "Binary search steps per variable");
  s->add_option("--seed", sol.seed, "Synthetic data seed");
  s->add_flag("--synthetic", sol.synthetic, "Use synthetic data (the default without --store)");
  s->add_option("--store", sol.store, "Use a loss store, one group per peril")
      ->check(CLI::ExistingFile);
  s->add_option("--method", sol.method, "cascade, recursive or brute");
  s->add_option("--out", sol.out, "Result JSON");

  CensusArgs cen;
  auto* c = app.add_subcommand("census", "Tree sizes of solve over many synthetic instances");
  add_problem(c, cen.problem);
  c->add_option("--b", cen.bits, "Bit counts")->delimiter(',');
  c->add_option("--n-max", cen.n_max, "n ranges over 2 .. n_max / b");
  c->add_option("--instances", cen.instances, "Instances per (n, b)");
  c->add_option("--seed", cen.seed, "Base seed");
  c->add_flag("--timing", cen.timing, "Add a seconds column (not deterministic)");
  c->add_option("--out", cen.out, "Census CSV");

  QbbArgs qbb;
  auto* q = app.add_subcommand("estimate-qbb", "Quantum branch and bound crossover estimate");
  q->add_option("--toffoli-rate", qbb.model.toffoli_rate, "AND gates per second");
  q->add_option("--ands-per-add", qbb.model.ands_per_add, "AND gates per 16-bit addition");
  q->add_option("--classical-ops", qbb.model.classical_ops, "Classical fp16 operations per second");
  q->add_option("--budget", qbb.model.budget_seconds, "Runtime budget in seconds");
  q->add_option("--events", qbb.events, "Events the bound oracle must read");

  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return kExitUsage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*g) return run_generate(gen, out, err, common);
    if (*p) return run_preprocess(pre, out, err, common);
    if (*e) return run_evaluate(eva, out, err, common);
    if (*o) return run_optimize(opt, out, err, common);
    if (*s) return run_solve(sol, out, err, common);
    if (*c) return run_census(cen, out, err, common);
    if (*q) return run_qbb(qbb, out, err, common);
  } catch (const Error& ex) {
    // bad input files and flag combinations
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 3;
  }
  return kExitUsage;
}

}  // namespace catxl::cli
