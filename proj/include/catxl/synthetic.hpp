#ifndef CATXL_SYNTHETIC_HPP
#define CATXL_SYNTHETIC_HPP

#include <cstdint>

#include "catxl/event_table.hpp"

namespace catxl {

// Synthetic heavy-tailed event set: one peril per group, a fixed number of
// events in every trial year, losses s_g * (1 - u)^(-1/2).
struct SyntheticSpec {
  std::uint32_t num_groups = 1;
  std::uint32_t years = 1000;
  std::uint32_t events_per_year = 50;
  double scale_base = 1.2;
  // false: s_g = scale_base^(g+1); true: s_g = scale_base for every group.
  bool constant_scale = false;
  std::uint64_t seed = 0;

  void validate() const;
};

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Counter-based stream: the draw for (seed, group, year, event) is a pure
// function of the key, so generation order never matters.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t group, std::uint64_t year,
                           std::uint64_t event) noexcept;

// Uniform in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t group, std::uint64_t year,
                       std::uint64_t event) noexcept;

double group_scale(const SyntheticSpec& spec, std::uint32_t group) noexcept;

// s * (1 - u)^(-1/2), using sqrt so results are bit-reproducible across platforms.
double pareto_loss(double scale, double u) noexcept;

EventLossTable generate_synthetic(const SyntheticSpec& spec);

}  // namespace catxl

#endif  // CATXL_SYNTHETIC_HPP
