#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "catxl/loss_store.hpp"
#include "oracle.hpp"

using namespace catxl;

namespace {

EventLossTable one_year(std::vector<double> losses) {
  std::vector<LossEvent> ev;
  for (double l : losses) ev.push_back({0, 0, l});
  return EventLossTable(1, {"P"}, ev);
}

std::vector<std::vector<Currency>> grids(std::size_t perils, int hi) {
  return std::vector<std::vector<Currency>>(perils, oracle::integer_grid(hi));
}

double direct_d(const EventLossTable& t, YearIndex y, PerilId p, double x) {
  double d = 0.0;
  for (const auto& e : t.events()) {
    if (e.trial_year == y && e.peril == p) d += std::min(x, e.loss);
  }
  return d;
}

}  // namespace

TEST_CASE("cumulative sum on a hand example", "[loss_store]") {
  const auto t = one_year({2, 5, 9});
  const auto s = CumulativeLossStore::build(t, {{4.0, 9.0, 12.0}});
  CHECK(s.cumulative(0, 0, 4.0) == 10.0);
  CHECK(s.cumulative(0, 0, 0.0) == 0.0);
  CHECK(s.cumulative(0, 0, 9.0) == 16.0);
  CHECK(s.cumulative(0, 0, 12.0) == 16.0);
  CHECK(s.excess(0, 0, 0.0) == 16.0);
  CHECK(s.max_event(0)[0] == 9.0);
  CHECK(s.yearly_gross()[0] == 16.0);
}

TEST_CASE("layer recovery matches per-event sums", "[loss_store]") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto t = oracle::random_table(rng, 10, 20, 3, 30);
    const auto s = CumulativeLossStore::build(t, grids(3, 40));
    for (PerilId p = 0; p < 3; ++p) {
      for (int a = 0; a <= 30; a += 3) {
        for (int l = 1; a + l <= 40; l += 4) {
          std::vector<double> out(t.num_trial_years(), 0.0);
          s.add_layer_recovery(p, a, l, out);
          for (YearIndex y = 0; y < t.num_trial_years(); ++y) {
            double want = 0.0;
            for (const auto& e : t.events()) {
              if (e.trial_year == y && e.peril == p) want += std::min(std::max(0.0, e.loss - a), double(l));
            }
            REQUIRE(out[y] == Catch::Approx(want).margin(1e-9));
          }
        }
      }
    }
  }
}

TEST_CASE("D is non-decreasing and concave in the threshold", "[loss_store]") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto t = oracle::random_table(rng, 10, 20, 2, 30);
    const auto s = CumulativeLossStore::build(t, grids(2, 35));
    for (PerilId p = 0; p < 2; ++p) {
      for (YearIndex y = 0; y < t.num_trial_years(); ++y) {
        double prev = 0.0, prev_slope = 1e300;
        for (int x = 1; x <= 35; ++x) {
          const double d = s.cumulative(y, p, x);
          REQUIRE(d == Catch::Approx(direct_d(t, y, p, x)));
          REQUIRE(d >= prev);
          REQUIRE(d - prev <= prev_slope + 1e-9);
          prev_slope = d - prev;
          prev = d;
        }
        REQUIRE(prev == Catch::Approx(s.gross(p)[y]));
      }
    }
  }
}

TEST_CASE("off-grid boundaries raise a grid error", "[loss_store]") {
  const auto s = CumulativeLossStore::build(one_year({2, 5}), {{1.0, 2.0, 4.0}});
  std::vector<double> out(1, 0.0);
  CHECK_THROWS_AS(s.add_layer_recovery(0, 3.0, 1.0, out), GridError);
  CHECK_NOTHROW(s.add_layer_recovery(0, 0.0, 2.0, out));
  CHECK(s.on_grid(0, 0.0));
  CHECK_FALSE(s.on_grid(0, 3.0));
}

TEST_CASE("bad grids are rejected", "[loss_store]") {
  const auto t = one_year({2});
  CHECK_THROWS_AS(CumulativeLossStore::build(t, {{2.0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(CumulativeLossStore::build(t, {{0.0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(CumulativeLossStore::build(t, {}), ValidationError);
}

TEST_CASE("save and load round trip, version is checked", "[loss_store]") {
  std::mt19937_64 rng(8);
  const auto t = oracle::random_table(rng, 10, 20, 3, 30);
  const auto s = CumulativeLossStore::build(t, grids(3, 30));
  const auto path = std::filesystem::temp_directory_path() / "catxl_store_test.bin";
  s.save(path);
  const auto back = CumulativeLossStore::load(path);
  REQUIRE(back.num_years() == s.num_years());
  REQUIRE(back.peril_names() == s.peril_names());
  for (PerilId p = 0; p < 3; ++p) {
    CHECK(back.thresholds(p) == s.thresholds(p));
    for (std::size_t i = 0; i < s.thresholds(p).size(); ++i) {
      const auto x = s.excess_column(p, i);
      const auto y = back.excess_column(p, i);
      CHECK(std::vector<double>(x.begin(), x.end()) == std::vector<double>(y.begin(), y.end()));
    }
  }
  CHECK(back.yearly_gross() == s.yearly_gross());

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const std::uint32_t bogus = 99;
    f.write(reinterpret_cast<const char*>(&bogus), sizeof bogus);
  }
  CHECK_THROWS_AS(CumulativeLossStore::load(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("grid helpers", "[loss_store]") {
  const auto g = geometric_round_grid(1.0, 1000.0, 4);
  CHECK(g == std::vector<Currency>{1.0, 10.0, 100.0, 1000.0});
  const auto a = arithmetic_grid(0.5, 2.0);
  CHECK(a == std::vector<Currency>{0.5, 1.0, 1.5, 2.0});
  const auto m = merge_grids({3.0, 1.0}, std::vector<Currency>{2.0, 1.0 + 1e-9, 0.0});
  CHECK(m == std::vector<Currency>{1.0, 2.0, 3.0});
  const auto r = geometric_round_grid(1.0, 50.0, 12);
  CHECK(r.size() == 12);
  CHECK(std::is_sorted(r.begin(), r.end()));
}

TEST_CASE("values below the compression floor are refused", "[loss_store]") {
  const auto t = one_year({5, 9});
  const std::vector<Currency> base{2.0}, top{2.0}, floor{4.0};
  const auto s = CumulativeLossStore::build(t, {{1.0, 4.0, 9.0, 12.0}}, base, top, floor);
  CHECK(s.floor(0) == 4.0);
  CHECK_FALSE(s.on_grid(0, 0.0));
  CHECK_FALSE(s.on_grid(0, 1.0));
  CHECK(s.on_grid(0, 4.0));
  std::vector<double> out(1, 0.0);
  CHECK_THROWS_AS(s.add_layer_recovery(0, 0.0, 4.0, out), GridError);
  CHECK_THROWS_AS(s.add_layer_recovery(0, 1.0, 3.0, out), GridError);
  s.add_layer_recovery(0, 4.0, 8.0, out);
  CHECK(out[0] == 6.0);
  CHECK(s.yearly_gross()[0] == 16.0);

  const auto path = std::filesystem::temp_directory_path() / "catxl_store_floor.bin";
  s.save(path);
  CHECK(CumulativeLossStore::load(path).floor(0) == 4.0);
  std::filesystem::remove(path);
}
