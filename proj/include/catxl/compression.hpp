#ifndef CATXL_COMPRESSION_HPP
#define CATXL_COMPRESSION_HPP

#include <span>
#include <vector>

#include "catxl/event_table.hpp"

namespace catxl {

// Peril -> group assignment used by the loss-data stage.
struct GroupMap {
  std::vector<GroupId> group_of;  // indexed by peril id
  std::uint32_t num_groups = 0;

  static GroupMap identity(std::size_t num_perils);
  void validate(std::size_t num_perils) const;
};

struct CompressionReport {
  std::vector<Currency> min_attachment;  // per group
  std::size_t events_before = 0;
  std::size_t events_after = 0;
  double reduction_factor = 1.0;  // events_before / events_after (inf when nothing is left)
};

// For each group, the smallest attachment A such that at most a fraction
// `p_attach_max` of trial years has a largest single group event above A
// (nearest rank on the sorted yearly maxima). When `grids` is given, A is
// rounded up to the group's grid. Groups without events get 0.
std::vector<Currency> compute_min_attachments(const EventLossTable& table, const GroupMap& groups,
                                              double p_attach_max,
                                              std::span<const std::vector<Currency>> grids = {});

struct CompressedTable {
  EventLossTable table;
  // Losses removed by compression, indexed [peril * years + year].
  std::vector<Currency> base_loss;
  // Largest removed event per (year, peril), same layout; keeps OEP intact.
  std::vector<Currency> base_max;
  CompressionReport report;

  Currency base_loss_of(YearIndex year, PerilId peril) const {
    return base_loss[static_cast<std::size_t>(peril) * table.num_trial_years() + year];
  }
  std::vector<Currency> group_base_loss(const GroupMap& groups, GroupId g) const;
};

// Removes events with loss <= A^min of their group. Removed losses are summed
// per (year, peril) in ascending loss order, which is the same order the
// store uses for yearly totals, so totals survive bit for bit.
// Output events are ordered by (peril, year, loss).
CompressedTable compress(const EventLossTable& table, const GroupMap& groups,
                         std::span<const Currency> min_attachment);

}  // namespace catxl

#endif  // CATXL_COMPRESSION_HPP
