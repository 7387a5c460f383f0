#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "catxl/compression.hpp"
#include "catxl/contract.hpp"
#include "oracle.hpp"

using namespace catxl;

TEST_CASE("minimum attachment by nearest rank", "[compression]") {
  std::vector<LossEvent> ev;
  for (YearIndex y = 0; y < 10; ++y) ev.push_back({y, 0, static_cast<double>(y + 1)});
  const EventLossTable t(10, {"P"}, ev);
  const auto gm = GroupMap::identity(1);
  CHECK(compute_min_attachments(t, gm, 0.1) == std::vector<Currency>{9.0});
  CHECK(compute_min_attachments(t, gm, 1.0 - 1e-12) == std::vector<Currency>{0.0});
  CHECK(compute_min_attachments(t, gm, 0.25) == std::vector<Currency>{8.0});
  CHECK_THROWS_AS(compute_min_attachments(t, gm, 0.0), DomainError);
  const std::vector<std::vector<Currency>> grid{{5.0, 10.0, 20.0}};
  CHECK(compute_min_attachments(t, gm, 0.1, grid) == std::vector<Currency>{10.0});
}

TEST_CASE("groups without events get zero", "[compression]") {
  const EventLossTable t(4, {"A", "B"}, {{0, 0, 3.0}});
  GroupMap gm{{0, 1}, 2};
  CHECK(compute_min_attachments(t, gm, 0.1)[1] == 0.0);
}

TEST_CASE("compression removes events at or below the minimum", "[compression]") {
  const EventLossTable t(1, {"P"}, {{0, 0, 2.0}, {0, 0, 5.0}, {0, 0, 9.0}});
  const auto c = compress(t, GroupMap::identity(1), std::vector<Currency>{4.0});
  REQUIRE(c.table.size() == 2);
  CHECK(c.table.events()[0].loss == 5.0);
  CHECK(c.table.events()[1].loss == 9.0);
  CHECK(c.base_loss_of(0, 0) == 2.0);
  CHECK(c.report.reduction_factor == Catch::Approx(1.5));

  const auto id = compress(t, GroupMap::identity(1), std::vector<Currency>{0.0});
  CHECK(id.table.size() == 3);
  CHECK(id.report.reduction_factor == 1.0);

  const auto all = compress(t, GroupMap::identity(1), std::vector<Currency>{9.0});
  CHECK(all.table.empty());
  CHECK(all.base_loss_of(0, 0) == 16.0);
  CHECK(all.base_max[0] == 9.0);
}

TEST_CASE("compressed stores reproduce totals, maxima and recoveries exactly", "[compression]") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const auto t = oracle::random_table(rng, 10, 20, 3, 30);
    const auto grouping = oracle::random_grouping(rng, 3);
    const auto gm = grouping.group_map(3);
    const double p = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
    const std::vector<std::vector<Currency>> g(3, oracle::integer_grid(40));
    const auto amin = compute_min_attachments(t, gm, p, g);
    const auto c = compress(t, gm, amin);
    REQUIRE(c.report.reduction_factor >= 1.0);
    const auto full = CumulativeLossStore::build(t, g);
    const auto small = CumulativeLossStore::build(c.table, g, c.base_loss, c.base_max);
    REQUIRE(full.yearly_gross() == small.yearly_gross());
    for (PerilId q = 0; q < 3; ++q) {
      const auto m1 = full.max_event(q);
      const auto m2 = small.max_event(q);
      REQUIRE(std::equal(m1.begin(), m1.end(), m2.begin()));
      const Currency a0 = amin[gm.group_of[q]];
      for (int a = static_cast<int>(a0); a <= 35; ++a) {
        for (int l = 1; a + l <= 40; l += 3) {
          std::vector<double> r1(t.num_trial_years()), r2(t.num_trial_years());
          full.add_layer_recovery(q, a, l, r1);
          small.add_layer_recovery(q, a, l, r2);
          REQUIRE(r1 == r2);
        }
      }
    }
  }
}

TEST_CASE("group map validation", "[compression]") {
  GroupMap bad{{0, 2}, 2};
  CHECK_THROWS_AS(bad.validate(2), ValidationError);
  CHECK_THROWS_AS(GroupMap::identity(2).validate(3), ValidationError);
}
