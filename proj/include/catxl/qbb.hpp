#ifndef CATXL_QBB_HPP
#define CATXL_QBB_HPP

#include <cstdint>
#include <string>

#include "catxl/common.hpp"

namespace catxl {

// Cost model for quantum branch and bound: a fault-tolerant device runs
// toffoli_rate AND gates per second and a 16-bit addition costs
// ands_per_add of them; the classical side runs classical_ops fp16
// operations per second.
struct HardwareModel {
  double toffoli_rate = 1e5;
  std::uint64_t ands_per_add = 15;
  // 3 GHz x 2 AVX-512 units x 32 fp16 lanes.
  double classical_ops = 1.92e11;
  double budget_seconds = 1e6;

  void validate() const;
};

enum class OracleVerdict { feasible, at_limit, infeasible };
const char* to_string(OracleVerdict v);

struct CrossoverReport {
  double t_q = 0.0;      // seconds per quantum addition
  double t_c = 0.0;      // seconds per classical operation
  double t_ratio = 0.0;  // t_q / t_c
  // Smallest tree size N with sqrt(N) t_q <= N t_c, i.e. ceil(t_ratio^2).
  double min_tree_size = 0.0;
  // Largest M with M t_q sqrt(N) <= budget at N = min_tree_size.
  std::uint64_t max_ops_per_oracle = 0;
  std::string summary;
};

CrossoverReport estimate(const HardwareModel& model);

// One subtraction per event is the least any exact bound evaluation needs.
std::uint64_t oracle_cost_lower_bound(std::uint64_t event_count);

OracleVerdict oracle_verdict(std::uint64_t event_count, const CrossoverReport& report);

// Rounds to three significant figures and formats as in "2.88e+07".
std::string three_sig(double x);

}  // namespace catxl

#endif  // CATXL_QBB_HPP
