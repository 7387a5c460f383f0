#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "catxl/bnb.hpp"
#include "oracle.hpp"

using namespace catxl;

namespace {

bool within(const BnbProblem& p, const std::vector<std::int64_t>& net) {
  return oracle::bnb_within(p, net);
}

auto enumerate(const BnbProblem& p) { return oracle::bnb_enumerate(p); }

BnbProblem synthetic(std::size_t n, std::size_t b, std::uint64_t seed, std::uint32_t years = 200) {
  SyntheticSpec spec;
  spec.num_groups = static_cast<std::uint32_t>(n);
  spec.years = years;
  spec.events_per_year = 10;
  spec.seed = seed;
  BnbConfig cfg;
  cfg.groups = n;
  cfg.bits = b;
  return make_synthetic_problem(spec, cfg);
}

}  // namespace

TEST_CASE("problem tables match per-event sums", "[bnb]") {
  std::mt19937_64 rng(3);
  const auto t = oracle::random_table(rng, 10, 20, 2, 30);
  BnbConfig cfg;
  cfg.groups = 2;
  cfg.bits = 2;
  cfg.p_attach = 0.3;
  const auto p = make_bnb_problem(t, cfg);
  REQUIRE(p.n() == 2);
  REQUIRE(p.candidates() == 16);
  for (std::size_t g = 0; g < 2; ++g) {
    const auto& grp = p.groups[g];
    for (std::size_t c = 0; c < 16; ++c) {
      const double a = grp.attachments[c / 4];
      const double l = grp.limit(c);
      REQUIRE(l >= 0.0);
      REQUIRE(a >= grp.a_min - 1e-9);
      double total = 0.0;
      for (std::size_t y = 0; y < p.years; ++y) {
        double r = 0.0;
        for (const auto& e : t.events()) {
          if (e.peril == g && e.trial_year == y) r += std::min(std::max(0.0, e.loss - a), l);
        }
        total += r;
        REQUIRE(std::llabs(grp.recovery[c][y] - to_units(r)) <= 1);
      }
      const double want = -cfg.rho * total / static_cast<double>(p.years);
      REQUIRE(std::llabs(grp.profit[c] - to_units(want)) <= 2);
    }
    // The minimum-risk layer recovers at least as much as any candidate.
    for (std::size_t c = 0; c < 16; ++c) {
      for (std::size_t y = 0; y < p.years; ++y) REQUIRE(grp.star[y] >= grp.recovery[c][y]);
    }
  }
}

TEST_CASE("group profit", "[bnb]") {
  std::mt19937_64 rng(4);
  const auto t = oracle::random_table(rng, 10, 20, 1, 30);
  const auto s = CumulativeLossStore::build(t, {oracle::integer_grid(40)});
  CHECK(group_profit(s, 0, 5, 0, 0.1) == 0.0);
  for (int a = 0; a < 30; ++a) {
    double prev = 0.0;
    for (int l = 1; a + l <= 40; ++l) {
      CHECK(group_profit(s, 0, a, l, 0.0) == 0.0);
      const double v = group_profit(s, 0, a, l, 0.1);
      REQUIRE(v <= prev + 1e-12);
      prev = v;
    }
  }
  CHECK_THROWS_AS(group_profit(s, 0, -1, 2, 0.1), DomainError);
}

TEST_CASE("cascade equals exhaustive search", "[bnb]") {
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t b = 1; 2 * n * b <= 8; ++b) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto p = synthetic(n, b, seed);
        const auto cas = solve_cascade(p);
        const auto want = enumerate(p);
        const auto brute = brute_force_solve(p);
        INFO("n=" << n << " b=" << b << " seed=" << seed);
        REQUIRE(cas.feasible == want.feasible);
        REQUIRE(brute.feasible == want.feasible);
        if (want.feasible) {
          REQUIRE(cas.objective_units == want.objective);
          REQUIRE(brute.objective_units == want.objective);
          REQUIRE(p.profit(cas.assignment) == cas.objective_units);
          REQUIRE(within(p, p.net_loss(cas.assignment)));
        }
        if (n <= 3 && b <= 2) {
          const auto rec = recursive_bound_solve(p);
          REQUIRE(rec.feasible == want.feasible);
          if (want.feasible) REQUIRE(rec.objective_units == want.objective);
        }
        REQUIRE(cas.suffixes.size() == n - 1);
        REQUIRE(cas.stats.reduction_factor >= 1.0);
      }
    }
  }
}

TEST_CASE("an unbounded risk limit buys nothing", "[bnb]") {
  SyntheticSpec spec;
  spec.num_groups = 3;
  spec.years = 100;
  spec.events_per_year = 5;
  BnbConfig cfg;
  cfg.groups = 3;
  cfg.bits = 2;
  cfg.k_max = std::numeric_limits<double>::infinity();
  const auto p = make_synthetic_problem(spec, cfg);
  const auto r = solve_cascade(p);
  REQUIRE(r.feasible);
  CHECK(r.stats.nodes_pruned_by_risk == 0);
  // Candidates are interval midpoints, so the cheapest one per group is the
  // highest attachment with the smallest limit.
  std::int64_t want = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    const auto& grp = p.groups[g];
    want += *std::max_element(grp.profit.begin(), grp.profit.end());
    const std::size_t cheapest = (p.side() - 1) * p.side();
    CHECK(grp.profit[r.assignment[g]] == grp.profit[cheapest]);
    CHECK(grp.limit(cheapest) == Catch::Approx(grp.l_max / 8));
  }
  CHECK(r.objective_units == want);
}

TEST_CASE("a limit below the minimum risk is infeasible at once", "[bnb]") {
  SyntheticSpec spec;
  spec.num_groups = 3;
  spec.years = 100;
  spec.events_per_year = 5;
  BnbConfig cfg;
  cfg.groups = 3;
  cfg.bits = 2;
  cfg.k_max = 0.0;
  const auto p = make_synthetic_problem(spec, cfg);
  const auto r = solve_cascade(p);
  CHECK_FALSE(r.feasible);
  CHECK(r.risk == Catch::Approx(r.min_risk));
  CHECK(r.min_risk > 0.0);
  CHECK(r.stats.nodes_visited <= 2 * 3 * 2 * 2);
  CHECK_FALSE(brute_force_solve(p).feasible);
}

TEST_CASE("a single group is one plain search", "[bnb]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = synthetic(1, 3, seed);
    const auto r = solve_cascade(p);
    const auto w = enumerate(p);
    REQUIRE(r.feasible == w.feasible);
    if (w.feasible) REQUIRE(r.objective_units == w.objective);
    CHECK(r.suffixes.empty());
    const auto rec = synthetic(1, 2, seed);
    CHECK(recursive_bound_solve(rec).objective_units == solve_cascade(rec).objective_units);
  }
}

TEST_CASE("aggregate risk measure", "[bnb]") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    SyntheticSpec spec;
    spec.num_groups = 2;
    spec.years = 150;
    spec.events_per_year = 8;
    spec.seed = seed;
    BnbConfig cfg;
    cfg.groups = 2;
    cfg.bits = 2;
    cfg.risk = BnbRiskKind::aep;
    cfg.beta = 0.9;
    const auto p = make_synthetic_problem(spec, cfg);
    const auto r = solve_cascade(p);
    const auto w = enumerate(p);
    REQUIRE(r.feasible == w.feasible);
    if (w.feasible) REQUIRE(r.objective_units == w.objective);
  }
}

TEST_CASE("the relaxation never rejects a feasible vector", "[bnb]") {
  const auto p = synthetic(2, 2, 11, 100);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::size_t> a{rng() % 16, rng() % 16};
    const auto net = p.net_loss(a);
    if (p.feasible(net)) REQUIRE_FALSE(p.surely_infeasible(net));
    REQUIRE(p.feasible(net) == within(p, net));
  }
}

TEST_CASE("store problems snap to the grid", "[bnb]") {
  SyntheticSpec spec;
  spec.num_groups = 2;
  spec.years = 100;
  spec.events_per_year = 5;
  const auto t = generate_synthetic(spec);
  std::vector<std::vector<Currency>> grids(2, geometric_round_grid(0.5, 100.0, 60));
  const auto s = CumulativeLossStore::build(t, grids);
  BnbConfig cfg;
  cfg.groups = 2;
  cfg.bits = 1;
  const auto p = make_store_problem(s, cfg);
  for (PerilId g = 0; g < 2; ++g) {
    for (double a : p.groups[g].attachments) CHECK(s.on_grid(g, a));
    for (double top : p.groups[g].tops) CHECK(s.on_grid(g, top));
  }
  const auto r = solve_cascade(p);
  const auto w = enumerate(p);
  REQUIRE(r.feasible == w.feasible);
  if (w.feasible) CHECK(r.objective_units == w.objective);
}

TEST_CASE("configuration checks", "[bnb]") {
  BnbConfig c;
  c.bits = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.bits = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.bits = 1;
  c.p_attach = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(recursive_bound_solve(synthetic(5, 1, 0, 20)), ConfigError);
}
