#include "catxl/synthetic.hpp"

#include <cmath>
#include <string>

namespace catxl {

void SyntheticSpec::validate() const {
  if (num_groups < 1) throw ValidationError("synthetic spec: num_groups must be >= 1");
  if (years < 1) throw ValidationError("synthetic spec: years must be >= 1");
  if (!(scale_base > 1.0)) throw ValidationError("synthetic spec: scale must be > 1");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t group, std::uint64_t year,
                           std::uint64_t event) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ group);
  h = splitmix64(h ^ year);
  return splitmix64(h ^ event);
}

double counter_uniform(std::uint64_t seed, std::uint64_t group, std::uint64_t year,
                       std::uint64_t event) noexcept {
  return static_cast<double>(counter_hash(seed, group, year, event) >> 11) * 0x1.0p-53;
}

double group_scale(const SyntheticSpec& spec, std::uint32_t group) noexcept {
  if (spec.constant_scale) return spec.scale_base;
  double s = spec.scale_base;
  for (std::uint32_t i = 0; i < group; ++i) s *= spec.scale_base;
  return s;
}

double pareto_loss(double scale, double u) noexcept { return scale / std::sqrt(1.0 - u); }

EventLossTable generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<std::string> names;
  names.reserve(spec.num_groups);
  for (std::uint32_t g = 0; g < spec.num_groups; ++g) names.push_back("G" + std::to_string(g));

  std::vector<LossEvent> events;
  events.reserve(static_cast<std::size_t>(spec.num_groups) * spec.years * spec.events_per_year);
  for (std::uint32_t g = 0; g < spec.num_groups; ++g) {
    const double scale = group_scale(spec, g);
    for (std::uint32_t t = 0; t < spec.years; ++t) {
      for (std::uint32_t e = 0; e < spec.events_per_year; ++e) {
        const double u = counter_uniform(spec.seed, g, t, e);
        events.push_back({t, g, pareto_loss(scale, u)});
      }
    }
  }
  return EventLossTable(spec.years, std::move(names), std::move(events));
}

}  // namespace catxl
