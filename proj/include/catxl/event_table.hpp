#ifndef CATXL_EVENT_TABLE_HPP
#define CATXL_EVENT_TABLE_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "catxl/common.hpp"

namespace catxl {

struct LossEvent {
  YearIndex trial_year = 0;
  PerilId peril = 0;
  Currency loss = 0.0;

  friend bool operator==(const LossEvent&, const LossEvent&) = default;
};

// Gross loss events keyed by (trial year, peril). Peril ids index the catalog.
// Years without events are legal and contribute zero loss.
class EventLossTable {
 public:
  EventLossTable() = default;
  EventLossTable(std::uint32_t num_trial_years, std::vector<std::string> peril_names,
                 std::vector<LossEvent> events);

  std::uint32_t num_trial_years() const noexcept { return num_trial_years_; }
  std::size_t num_perils() const noexcept { return peril_names_.size(); }
  const std::vector<std::string>& peril_names() const noexcept { return peril_names_; }
  const std::string& peril_name(PerilId p) const { return peril_names_.at(p); }
  std::optional<PerilId> find_peril(std::string_view name) const;

  std::span<const LossEvent> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  // Largest single event per year for one peril (0 in years without events).
  std::vector<Currency> yearly_max(PerilId p) const;

  friend bool operator==(const EventLossTable&, const EventLossTable&) = default;

 private:
  void validate() const;

  std::uint32_t num_trial_years_ = 1;
  std::vector<std::string> peril_names_;
  std::vector<LossEvent> events_;
};

enum class EventFormat { csv, binary };

EventFormat event_format_from_path(const std::filesystem::path& path);

// CSV: header `trial_year,peril,loss`; peril ids are assigned in sorted name
// order so the result does not depend on row order. When `num_trial_years` is
// absent it is taken as max(trial_year) + 1.
EventLossTable load_events(const std::filesystem::path& path, EventFormat format,
                           std::optional<std::uint32_t> num_trial_years = std::nullopt);
EventLossTable parse_events_csv(std::string_view text,
                                std::optional<std::uint32_t> num_trial_years = std::nullopt);

void save_events(const EventLossTable& table, const std::filesystem::path& path,
                 EventFormat format);
std::string to_csv(const EventLossTable& table);

}  // namespace catxl

#endif  // CATXL_EVENT_TABLE_HPP
