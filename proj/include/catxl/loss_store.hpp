#ifndef CATXL_LOSS_STORE_HPP
#define CATXL_LOSS_STORE_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catxl/event_table.hpp"

namespace catxl {

// Precomputed per-(year, peril) loss functions on a discrete threshold grid.
//
// The store keeps the complementary cumulative sum
//   E_{t,p}(x) = sum_e max(0, L_e - x) = total_{t,p} - D_{t,p}(x)
// summed in ascending loss order. Layer recoveries are E(A) - E(A + L), which
// equals D(A + L) - D(A). Events at or below A contribute exact zeros, so a
// store built from compressed data yields bit-identical recoveries for any
// A >= A^min.
//
// Immutable after build(); safe for any number of concurrent readers.
class CumulativeLossStore {
 public:
  // `thresholds[p]` must be strictly increasing and strictly positive.
  // `base_loss` ([peril * years + year]) holds losses compressed away from the
  // table; they count toward gross totals only. `base_max` (same layout) holds
  // the largest removed event, so yearly maxima survive compression.
  // `floor[p]` is the compression threshold of peril p: recoveries are only
  // exact for attachments at or above it, so lower values are off the grid.
  static CumulativeLossStore build(const EventLossTable& table,
                                   std::vector<std::vector<Currency>> thresholds,
                                   std::span<const Currency> base_loss = {},
                                   std::span<const Currency> base_max = {},
                                   std::span<const Currency> floor = {});

  static CumulativeLossStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::uint32_t num_years() const noexcept { return years_; }
  std::size_t num_perils() const noexcept { return names_.size(); }
  const std::vector<std::string>& peril_names() const noexcept { return names_; }
  std::optional<PerilId> find_peril(const std::string& name) const;

  const std::vector<Currency>& thresholds(PerilId p) const { return thresholds_.at(p); }
  std::optional<std::size_t> threshold_index(PerilId p, Currency x) const;
  // x == 0 is on the grid (D(0) = 0) unless the peril has a positive floor.
  bool on_grid(PerilId p, Currency x) const;
  Currency floor(PerilId p) const { return floor_.at(p); }

  // E at threshold index i for every year.
  std::span<const double> excess_column(PerilId p, std::size_t i) const;
  // E_{t,p}(x); x must be 0 or on the grid.
  Currency excess(YearIndex t, PerilId p, Currency x) const;
  // D_{t,p}(x) = sum_e min(x, L_e).
  Currency cumulative(YearIndex t, PerilId p, Currency x) const;

  // out[t] += E(a) - E(a + l) for every year; throws GridError off the grid.
  void add_layer_recovery(PerilId p, Currency a, Currency l, std::span<double> out) const;

  std::span<const double> max_event(PerilId p) const { return column(max_event_, p); }
  std::span<const double> base_loss(PerilId p) const { return column(base_loss_, p); }
  std::span<const double> event_total(PerilId p) const { return column(event_total_, p); }
  // Yearly gross loss of a peril: base loss plus all stored events.
  std::span<const double> gross(PerilId p) const { return column(gross_, p); }
  // Yearly gross loss summed over perils in id order.
  const std::vector<double>& yearly_gross() const noexcept { return yearly_gross_; }

 private:
  std::span<const double> column(const std::vector<double>& v, PerilId p) const {
    return {v.data() + static_cast<std::size_t>(p) * years_, years_};
  }
  std::span<const double> excess_at(PerilId p, Currency x) const;
  void finish();

  std::uint32_t years_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<Currency>> thresholds_;
  std::vector<Currency> floor_;  // per peril
  std::vector<std::size_t> excess_offset_;  // start of peril p in excess_
  std::vector<double> excess_;              // [offset_p + i * years + t]
  std::vector<double> max_event_;
  std::vector<double> base_loss_;
  std::vector<double> event_total_;
  std::vector<double> gross_;
  std::vector<double> yearly_gross_;
};

// Up to `count` distinct "round" values spaced geometrically on [lo, hi]:
// each point is rounded to the fewest significant digits that still keeps
// `count` distinct values.
std::vector<Currency> geometric_round_grid(Currency lo, Currency hi, std::size_t count);

// Evenly spaced grid step, 2 * step, ..., up to and including `hi`.
std::vector<Currency> arithmetic_grid(Currency step, Currency hi);

// Sorted union with near-duplicates (within tolerance) removed.
std::vector<Currency> merge_grids(std::vector<Currency> a, std::span<const Currency> b);

}  // namespace catxl

#endif  // CATXL_LOSS_STORE_HPP
