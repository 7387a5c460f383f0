#include "catxl/loss_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"

namespace catxl {

namespace {

constexpr char kStoreMagic[9] = "CATXLSTO";
constexpr std::uint32_t kStoreVersion = 2;

void check_grid(const std::vector<Currency>& grid, PerilId p) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) {
      throw ValidationError("peril " + std::to_string(p) + ": thresholds must be positive");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ValidationError("peril " + std::to_string(p) +
                            ": thresholds must be strictly increasing");
    }
  }
}

double round_sig(double x, int digits) {
  const double e = std::floor(std::log10(x)) - digits + 1;
  const double scale = std::pow(10.0, e);
  return std::round(x / scale) * scale;
}

}  // namespace

CumulativeLossStore CumulativeLossStore::build(const EventLossTable& table,
                                               std::vector<std::vector<Currency>> thresholds,
                                               std::span<const Currency> base_loss,
                                               std::span<const Currency> base_max,
                                               std::span<const Currency> floor) {
  const std::size_t num_perils = table.num_perils();
  const std::uint32_t years = table.num_trial_years();
  if (thresholds.size() != num_perils) {
    throw ValidationError("one threshold grid per peril required");
  }
  for (PerilId p = 0; p < num_perils; ++p) check_grid(thresholds[p], p);
  const std::size_t cells = num_perils * static_cast<std::size_t>(years);
  if (!base_loss.empty() && base_loss.size() != cells) {
    throw ValidationError("base loss must have one entry per (peril, year)");
  }
  if (!base_max.empty() && base_max.size() != cells) {
    throw ValidationError("base maxima must have one entry per (peril, year)");
  }
  if (!floor.empty() && floor.size() != num_perils) {
    throw ValidationError("one floor per peril required");
  }

  CumulativeLossStore s;
  s.years_ = years;
  s.names_ = table.peril_names();
  s.thresholds_ = std::move(thresholds);
  s.floor_.assign(num_perils, 0.0);
  if (!floor.empty()) s.floor_.assign(floor.begin(), floor.end());
  s.excess_offset_.resize(num_perils);
  std::size_t offset = 0;
  for (PerilId p = 0; p < num_perils; ++p) {
    s.excess_offset_[p] = offset;
    offset += s.thresholds_[p].size() * years;
  }
  s.excess_.assign(offset, 0.0);
  if (base_max.empty()) {
    s.max_event_.assign(cells, 0.0);
  } else {
    s.max_event_.assign(base_max.begin(), base_max.end());
  }
  s.event_total_.assign(cells, 0.0);
  if (base_loss.empty()) {
    s.base_loss_.assign(cells, 0.0);
  } else {
    s.base_loss_.assign(base_loss.begin(), base_loss.end());
  }
  s.gross_ = s.base_loss_;

  // Bucket losses per (peril, year) in ascending order.
  std::vector<std::size_t> bucket_start(cells + 1, 0);
  for (const auto& e : table.events()) {
    ++bucket_start[static_cast<std::size_t>(e.peril) * years + e.trial_year + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) bucket_start[c + 1] += bucket_start[c];
  std::vector<double> losses(table.size());
  {
    auto fill = bucket_start;
    for (const auto& e : table.events()) {
      losses[fill[static_cast<std::size_t>(e.peril) * years + e.trial_year]++] = e.loss;
    }
  }

  for (PerilId p = 0; p < num_perils; ++p) {
    const auto& grid = s.thresholds_[p];
    for (YearIndex t = 0; t < years; ++t) {
      const std::size_t c = static_cast<std::size_t>(p) * years + t;
      const auto first = losses.begin() + static_cast<std::ptrdiff_t>(bucket_start[c]);
      const auto last = losses.begin() + static_cast<std::ptrdiff_t>(bucket_start[c + 1]);
      std::sort(first, last);
      double total = 0.0;
      double gross = s.gross_[c];
      for (auto it = first; it != last; ++it) {
        total += *it;
        gross += *it;
      }
      s.event_total_[c] = total;
      s.gross_[c] = gross;
      if (first != last) s.max_event_[c] = std::max(s.max_event_[c], *(last - 1));
      auto above = first;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        above = std::upper_bound(above, last, x);
        double excess = 0.0;
        for (auto it = above; it != last; ++it) excess += *it - x;
        s.excess_[s.excess_offset_[p] + i * years + t] = excess;
      }
    }
  }
  s.finish();
  return s;
}

void CumulativeLossStore::finish() {
  yearly_gross_.assign(years_, 0.0);
  for (PerilId p = 0; p < names_.size(); ++p) {
    const auto g = gross(p);
    for (YearIndex t = 0; t < years_; ++t) yearly_gross_[t] += g[t];
  }
}

std::optional<PerilId> CumulativeLossStore::find_peril(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<PerilId>(i);
  }
  return std::nullopt;
}

std::optional<std::size_t> CumulativeLossStore::threshold_index(PerilId p, Currency x) const {
  const auto& grid = thresholds_.at(p);
  auto it = std::lower_bound(grid.begin(), grid.end(), x - kCurrencyTolerance);
  if (it != grid.end() && currency_equal(*it, x)) {
    return static_cast<std::size_t>(it - grid.begin());
  }
  return std::nullopt;
}

bool CumulativeLossStore::on_grid(PerilId p, Currency x) const {
  if (x < floor_.at(p) - kCurrencyTolerance) return false;
  return currency_equal(x, 0.0) || threshold_index(p, x).has_value();
}

std::span<const double> CumulativeLossStore::excess_column(PerilId p, std::size_t i) const {
  return {excess_.data() + excess_offset_.at(p) + i * years_, years_};
}

std::span<const double> CumulativeLossStore::excess_at(PerilId p, Currency x) const {
  if (x < floor_.at(p) - kCurrencyTolerance) {
    throw GridError("value " + std::to_string(x) + " lies below the compression floor " +
                    std::to_string(floor_[p]) + " of peril '" + names_.at(p) + "'");
  }
  if (currency_equal(x, 0.0)) return event_total(p);
  const auto idx = threshold_index(p, x);
  if (!idx) {
    throw GridError("value " + std::to_string(x) + " is not on the threshold grid of peril '" +
                    names_.at(p) + "'");
  }
  return excess_column(p, *idx);
}

Currency CumulativeLossStore::excess(YearIndex t, PerilId p, Currency x) const {
  return excess_at(p, x)[t];
}

Currency CumulativeLossStore::cumulative(YearIndex t, PerilId p, Currency x) const {
  return event_total(p)[t] - excess(t, p, x);
}

void CumulativeLossStore::add_layer_recovery(PerilId p, Currency a, Currency l,
                                             std::span<double> out) const {
  const auto lower = excess_at(p, a);
  const auto upper = excess_at(p, a + l);
  for (YearIndex t = 0; t < years_; ++t) out[t] += lower[t] - upper[t];
}

void CumulativeLossStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write store: " + path.string());
  out.write(kStoreMagic, 8);
  detail::write_pod(out, kStoreVersion);
  detail::write_pod(out, years_);
  detail::write_pod(out, static_cast<std::uint32_t>(names_.size()));
  for (PerilId p = 0; p < names_.size(); ++p) {
    detail::write_string(out, names_[p]);
    detail::write_pod(out, floor_[p]);
    detail::write_pod(out, static_cast<std::uint32_t>(thresholds_[p].size()));
    detail::write_column<double>(out, thresholds_[p]);
  }
  for (PerilId p = 0; p < names_.size(); ++p) {
    detail::write_column<double>(
        out, std::span<const double>(excess_.data() + excess_offset_[p],
                                     thresholds_[p].size() * years_));
    detail::write_column<double>(out, max_event(p));
    detail::write_column<double>(out, base_loss(p));
    detail::write_column<double>(out, event_total(p));
    detail::write_column<double>(out, gross(p));
  }
  if (!out) throw ConfigError("failed writing store: " + path.string());
}

CumulativeLossStore CumulativeLossStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open store: " + path.string());
  detail::expect_magic(in, kStoreMagic, "loss store");
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != kStoreVersion) {
    throw ParseError("unsupported store version " + std::to_string(version));
  }
  CumulativeLossStore s;
  s.years_ = detail::read_pod<std::uint32_t>(in);
  const auto num_perils = detail::read_pod<std::uint32_t>(in);
  for (std::uint32_t p = 0; p < num_perils; ++p) {
    s.names_.push_back(detail::read_string(in));
    s.floor_.push_back(detail::read_pod<double>(in));
    const auto n = detail::read_pod<std::uint32_t>(in);
    s.thresholds_.push_back(detail::read_column<double>(in, n));
    check_grid(s.thresholds_.back(), p);
  }
  const std::size_t cells = static_cast<std::size_t>(num_perils) * s.years_;
  s.max_event_.reserve(cells);
  s.base_loss_.reserve(cells);
  s.event_total_.reserve(cells);
  s.gross_.reserve(cells);
  auto append = [&](std::vector<double>& dst) {
    const auto col = detail::read_column<double>(in, s.years_);
    dst.insert(dst.end(), col.begin(), col.end());
  };
  for (std::uint32_t p = 0; p < num_perils; ++p) {
    s.excess_offset_.push_back(s.excess_.size());
    const auto ex = detail::read_column<double>(in, s.thresholds_[p].size() * s.years_);
    s.excess_.insert(s.excess_.end(), ex.begin(), ex.end());
    append(s.max_event_);
    append(s.base_loss_);
    append(s.event_total_);
    append(s.gross_);
  }
  s.finish();
  return s;
}

std::vector<Currency> geometric_round_grid(Currency lo, Currency hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("grid bounds must satisfy 0 < lo <= hi");
  if (count == 0) return {};
  if (count == 1 || hi == lo) return {round_sig(hi, 15)};
  std::vector<Currency> grid;
  for (int digits = 2; digits <= 15; ++digits) {
    grid.clear();
    const double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < count; ++i) {
      const double x = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
      grid.push_back(round_sig(x, digits));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() == count) break;
  }
  return grid;
}

std::vector<Currency> arithmetic_grid(Currency step, Currency hi) {
  if (!(step > 0.0)) throw ValidationError("grid step must be positive");
  std::vector<Currency> grid;
  for (std::size_t k = 1;; ++k) {
    const double x = step * static_cast<double>(k);
    if (x > hi + kCurrencyTolerance) break;
    grid.push_back(x);
  }
  return grid;
}

std::vector<Currency> merge_grids(std::vector<Currency> a, std::span<const Currency> b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<Currency> out;
  for (double x : a) {
    if (!(x > 0.0)) continue;
    if (!out.empty() && currency_equal(out.back(), x)) continue;
    out.push_back(x);
  }
  return out;
}

}  // namespace catxl
