#include "catxl/compression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace catxl {

GroupMap GroupMap::identity(std::size_t num_perils) {
  GroupMap m;
  m.group_of.resize(num_perils);
  for (std::size_t p = 0; p < num_perils; ++p) m.group_of[p] = static_cast<GroupId>(p);
  m.num_groups = static_cast<std::uint32_t>(num_perils);
  return m;
}

void GroupMap::validate(std::size_t num_perils) const {
  if (group_of.size() != num_perils) {
    throw ValidationError("grouping must assign every peril to a group");
  }
  for (auto g : group_of) {
    if (g >= num_groups) throw ValidationError("grouping refers to an unknown group");
  }
}

std::vector<Currency> compute_min_attachments(const EventLossTable& table, const GroupMap& groups,
                                              double p_attach_max,
                                              std::span<const std::vector<Currency>> grids) {
  if (!(p_attach_max > 0.0 && p_attach_max < 1.0)) {
    throw DomainError("attachment probability must lie in (0, 1)");
  }
  groups.validate(table.num_perils());
  const std::uint32_t years = table.num_trial_years();
  std::vector<std::vector<Currency>> maxima(groups.num_groups,
                                            std::vector<Currency>(years, 0.0));
  std::vector<std::size_t> counts(groups.num_groups, 0);
  for (const auto& e : table.events()) {
    const auto g = groups.group_of[e.peril];
    auto& m = maxima[g][e.trial_year];
    m = std::max(m, e.loss);
    ++counts[g];
  }

  // Number of years allowed to exceed A; the slack absorbs p * T rounding.
  const auto allowed = static_cast<std::size_t>(
      std::floor(p_attach_max * static_cast<double>(years) + 1e-9));

  std::vector<Currency> out(groups.num_groups, 0.0);
  for (GroupId g = 0; g < groups.num_groups; ++g) {
    if (counts[g] == 0) continue;
    auto& m = maxima[g];
    std::sort(m.begin(), m.end());
    Currency a = 0.0;
    if (allowed < years) a = m[years - allowed - 1];
    if (!grids.empty()) {
      const auto& grid = grids[g];
      auto it = std::lower_bound(grid.begin(), grid.end(), a - kCurrencyTolerance);
      if (it == grid.end()) {
        throw GridError("group " + std::to_string(g) + ": minimum attachment above its grid");
      }
      a = *it;
    }
    out[g] = a;
  }
  return out;
}

std::vector<Currency> CompressedTable::group_base_loss(const GroupMap& groups, GroupId g) const {
  const auto years = table.num_trial_years();
  std::vector<Currency> out(years, 0.0);
  for (PerilId p = 0; p < groups.group_of.size(); ++p) {
    if (groups.group_of[p] != g) continue;
    for (YearIndex t = 0; t < years; ++t) out[t] += base_loss_of(t, p);
  }
  return out;
}

CompressedTable compress(const EventLossTable& table, const GroupMap& groups,
                         std::span<const Currency> min_attachment) {
  groups.validate(table.num_perils());
  if (min_attachment.size() != groups.num_groups) {
    throw ValidationError("one minimum attachment per group required");
  }
  std::vector<LossEvent> sorted(table.events().begin(), table.events().end());
  std::sort(sorted.begin(), sorted.end(), [](const LossEvent& a, const LossEvent& b) {
    if (a.peril != b.peril) return a.peril < b.peril;
    if (a.trial_year != b.trial_year) return a.trial_year < b.trial_year;
    return a.loss < b.loss;
  });

  const std::uint32_t years = table.num_trial_years();
  CompressedTable out;
  out.base_loss.assign(table.num_perils() * static_cast<std::size_t>(years), 0.0);
  out.base_max.assign(out.base_loss.size(), 0.0);
  std::vector<LossEvent> kept;
  kept.reserve(sorted.size());
  for (const auto& e : sorted) {
    const Currency threshold = min_attachment[groups.group_of[e.peril]];
    if (e.loss <= threshold) {
      const std::size_t c = static_cast<std::size_t>(e.peril) * years + e.trial_year;
      out.base_loss[c] += e.loss;
      out.base_max[c] = std::max(out.base_max[c], e.loss);
    } else {
      kept.push_back(e);
    }
  }
  out.report.min_attachment.assign(min_attachment.begin(), min_attachment.end());
  out.report.events_before = sorted.size();
  out.report.events_after = kept.size();
  if (kept.empty()) {
    out.report.reduction_factor =
        sorted.empty() ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    out.report.reduction_factor =
        static_cast<double>(sorted.size()) / static_cast<double>(kept.size());
  }
  out.table = EventLossTable(years, table.peril_names(), std::move(kept));
  return out;
}

}  // namespace catxl
