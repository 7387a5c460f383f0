#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "catxl/contract.hpp"
#include "oracle.hpp"

using namespace catxl;

namespace {

// Two stacked layers on one peril: 5 xs 3 and 8 xs 8.
Contract fig1_contract() {
  Contract c;
  c.grouping = PerilGrouping::singletons(1);
  c.layers = {{3.0, 5.0, 0, 0}, {8.0, 8.0, 0, 0}};
  return c;
}

CumulativeLossStore int_store(const EventLossTable& t, int hi) {
  return CumulativeLossStore::build(
      t, std::vector<std::vector<Currency>>(t.num_perils(), oracle::integer_grid(hi)));
}

Pricing zero_margin() {
  Pricing p;
  p.rho = 0.0;
  return p;
}

}  // namespace

TEST_CASE("event recovery", "[contract]") {
  CHECK(event_recovery(5, 3, 5) == 2);
  CHECK(event_recovery(10, 3, 5) == 5);
  CHECK(event_recovery(10, 8, 8) == 2);
  CHECK(event_recovery(2, 3, 5) == 0);
}

TEST_CASE("two-layer tower: retained and ceded parts", "[contract]") {
  // Year 0: a loss of 5. Year 1: a loss of 10.
  const EventLossTable t(2, {"P"}, {{0, 0, 5.0}, {1, 0, 10.0}});
  const auto store = int_store(t, 20);
  const auto y = evaluate_contract(fig1_contract(), store, zero_margin());
  CHECK(y.layers[0].recovery == std::vector<Currency>{2.0, 5.0});
  CHECK(y.layers[1].recovery == std::vector<Currency>{0.0, 2.0});
  CHECK(y.retained == std::vector<Currency>{3.0, 3.0});
  CHECK(y.net_loss == std::vector<Currency>{3.0, 3.0});
  CHECK(y.layers[0].avg_recovery == 3.5);
  CHECK(y.layers[0].premium == 3.5);
  CHECK(y.layers[1].premium == 1.0);
}

TEST_CASE("subgroup shifts and the aggregate limit", "[contract]") {
  // s1 = {0} with shift 0, s2 = {1} with shift -2; losses 8 on s1 and 7 on s2.
  const EventLossTable t(1, {"S1", "S2"}, {{0, 0, 8.0}, {0, 1, 7.0}});
  const auto store = int_store(t, 20);
  Contract c;
  PerilGroup g;
  g.subgroups = {{{0}, 0.0}, {{1}, -2.0}};
  c.grouping.groups = {g};
  c.layers = {{3.0, 5.0, 0, 0}, {8.0, 8.0, 0, 0}};
  c.validate(2);
  const auto y = evaluate_contract(c, store, zero_margin());
  CHECK(y.layers[0].recovery[0] == 5.0);
  CHECK(y.layers[1].recovery[0] == 1.0);
  const auto up = uncapped_layer_recovery(store, g, 3.0, 5.0);
  CHECK(up[0] == 10.0);
}

TEST_CASE("pricing", "[contract]") {
  Pricing p;
  p.rho = 0.1;
  CHECK(reinsurance_premium(100, 100, p) == Catch::Approx(110));
  p.mode = PricingMode::curve;
  p.rol_min = 0.01;
  CHECK(reinsurance_premium(100, 0, p) == Catch::Approx(1.0));
  CHECK(reinsurance_premium(100, 50, p) == Catch::Approx(56.0));

  PricingCurve c;
  c.rol_min = 0.02;
  c.points = {{0.1, 0.2}, {0.5, 0.8}};
  CHECK(c(0.05) == 0.02);
  CHECK(c(0.1) == Catch::Approx(0.2));
  CHECK(c(0.3) == Catch::Approx(0.5));
  CHECK(c(0.9) == Catch::Approx(1.4));
  CHECK(reinsurance_premium(10, 3, p, &c) == Catch::Approx(5.0));
}

TEST_CASE("pricing curve validation", "[contract]") {
  PricingCurve c;
  c.rol_min = 0.01;
  c.points = {{0.1, 0.2}};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.points = {{0.1, 0.2}, {0.05, 0.3}};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.points = {{0.1, 0.05}, {0.2, 0.3}};
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("reinstatement premium", "[contract]") {
  CHECK(reinstatement_premium(10, 1, 5, 4) == Catch::Approx(2));
  CHECK(reinstatement_premium(10, 0, 5, 4) == 0);
  CHECK(reinstatement_premium(10, 1, 20, 4) == Catch::Approx(4));
  CHECK(reinstatement_premium(10, 2, 20, 4) == Catch::Approx(8));
}

TEST_CASE("empty contract is the gross position", "[contract]") {
  std::mt19937_64 rng(1);
  const auto t = oracle::random_table(rng, 10, 20, 2, 20);
  const auto store = int_store(t, 20);
  Contract c;
  c.grouping = PerilGrouping::singletons(2);
  Pricing p;
  p.gross_profit = 50;
  const auto y = evaluate_contract(c, store, p);
  for (YearIndex k = 0; k < t.num_trial_years(); ++k) {
    CHECK(y.net_loss[k] == y.gross[k]);
    CHECK(y.net_profit[k] == 50 - y.gross[k]);
  }
}

TEST_CASE("store evaluation matches the per-event oracle", "[contract]") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto t = oracle::random_table(rng, 10, 20, 3, 25);
    const auto store = int_store(t, 30);
    const auto c = oracle::random_contract(rng, oracle::random_grouping(rng, 3), 0, 30, 2);
    Pricing p;
    p.rho = 0.15;
    p.gross_profit = 12;
    if (i % 2) {
      p.mode = PricingMode::curve;
      p.rol_min = 0.03;
    }
    const auto got = evaluate_contract(c, store, p);
    const auto want = oracle::evaluate(t, c, p);
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
      for (YearIndex k = 0; k < t.num_trial_years(); ++k) {
        REQUIRE(got.layers[l].recovery[k] == Catch::Approx(want.recovery[l][k]).margin(1e-9));
      }
      REQUIRE(got.layers[l].premium == Catch::Approx(want.premium[l]).margin(1e-9));
    }
    for (YearIndex k = 0; k < t.num_trial_years(); ++k) {
      REQUIRE(got.net_loss[k] == Catch::Approx(want.net_loss[k]).margin(1e-9));
      REQUIRE(got.net_profit[k] == Catch::Approx(want.net_profit[k]).margin(1e-9));
    }
  }
}

TEST_CASE("contract validation", "[contract]") {
  auto c = fig1_contract();
  CHECK_NOTHROW(c.validate(1));
  SECTION("gap in the tower") {
    c.layers[1].attachment = 9.0;
    CHECK_THROWS_AS(c.validate(1), ValidationError);
  }
  SECTION("non-positive limit") {
    c.layers[0].limit = 0.0;
    CHECK_THROWS_AS(c.validate(1), ValidationError);
  }
  SECTION("shift below zero") {
    c.grouping.groups[0].subgroups[0].shift = -4.0;
    CHECK_THROWS_AS(c.validate(1), ValidationError);
  }
  SECTION("unknown group") {
    c.layers[0].group = 3;
    CHECK_THROWS_AS(c.validate(1), ValidationError);
  }
}

TEST_CASE("canonical form and keys", "[contract]") {
  Contract a = fig1_contract();
  Contract b = a;
  std::swap(b.layers[0], b.layers[1]);
  b.canonicalize();
  CHECK(a.key() == b.key());
  CHECK(a.tower(0) == std::vector<std::size_t>{0, 1});
  Contract c = a;
  c.layers[1].reinstatements = 1;
  CHECK(a.key() != c.key());
}

TEST_CASE("grouping helpers", "[contract]") {
  auto g = PerilGrouping::from_partition({{2, 0}, {1}});
  g.canonicalize();
  CHECK(g.groups[0].perils() == std::vector<PerilId>{0, 2});
  CHECK(g.group_of(1) == GroupId{1});
  CHECK_NOTHROW(g.validate(3));
  CHECK_THROWS_AS(PerilGrouping::from_partition({{0}, {0, 1}}).validate(2), ValidationError);
  CHECK_THROWS_AS(PerilGrouping::from_partition({{0}}).validate(2), ValidationError);
  CHECK(PerilGrouping::single_group(3).groups.size() == 1);
}

TEST_CASE("averages need at least one year", "[contract]") {
  CHECK_THROWS_AS(average(std::vector<double>{}), DomainError);
  CHECK(average(std::vector<double>{0, 10}) == 5);
}
