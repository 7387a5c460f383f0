#include "catxl/qbb.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdio>

#include "catxl/common.hpp"

namespace catxl {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int ceil_rational(const cpp_rational& q) {
  cpp_int n = numerator(q), d = denominator(q);
  cpp_int f = n / d;
  if (f * d != n && n > 0) ++f;
  return f;
}

}  // namespace

void HardwareModel::validate() const {
  if (!(toffoli_rate > 0.0) || !std::isfinite(toffoli_rate)) {
    throw ConfigError("toffoli rate must be positive");
  }
  if (ands_per_add == 0) throw ConfigError("ands per add must be positive");
  if (!(classical_ops > 0.0) || !std::isfinite(classical_ops)) {
    throw ConfigError("classical ops must be positive");
  }
  if (!(budget_seconds > 0.0) || !std::isfinite(budget_seconds)) {
    throw ConfigError("budget must be positive");
  }
}

const char* to_string(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::feasible: return "feasible";
    case OracleVerdict::at_limit: return "feasible-at-limit";
    case OracleVerdict::infeasible: return "infeasible";
  }
  return "?";
}

std::string three_sig(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

CrossoverReport estimate(const HardwareModel& model) {
  model.validate();
  // Doubles convert to rationals exactly, so every comparison below is exact.
  const cpp_rational rate(model.toffoli_rate), ops(model.classical_ops),
      budget(model.budget_seconds);
  const cpp_rational t_q = cpp_rational(model.ands_per_add) / rate;
  const cpp_rational t_c = 1 / ops;
  const cpp_rational ratio = t_q / t_c;
  const cpp_int n = ceil_rational(ratio * ratio);

  // M t_q sqrt(N) <= budget  <=>  M^2 t_q^2 N <= budget^2
  const cpp_rational lhs_unit = t_q * t_q * cpp_rational(n);
  const cpp_rational rhs = budget * budget;
  auto fits = [&](const cpp_int& m) { return cpp_rational(m * m) * lhs_unit <= rhs; };
  const double approx = model.budget_seconds /
                        (static_cast<double>(t_q) * std::sqrt(static_cast<double>(n)));
  cpp_int m = approx > 0 ? cpp_int(static_cast<std::uint64_t>(std::floor(approx))) : cpp_int(0);
  while (m > 0 && !fits(m)) --m;
  while (fits(m + 1)) ++m;

  CrossoverReport r;
  r.t_q = static_cast<double>(t_q);
  r.t_c = static_cast<double>(t_c);
  r.t_ratio = static_cast<double>(ratio);
  r.min_tree_size = static_cast<double>(n);
  r.max_ops_per_oracle = static_cast<std::uint64_t>(m);
  r.summary = "t_q/t_c = " + three_sig(r.t_ratio) + "; quantum advantage needs N >= " +
              three_sig(r.min_tree_size) + " nodes; within " + three_sig(model.budget_seconds) +
              " s an oracle may use at most " + std::to_string(r.max_ops_per_oracle) +
              " additions";
  return r;
}

std::uint64_t oracle_cost_lower_bound(std::uint64_t event_count) { return event_count; }

OracleVerdict oracle_verdict(std::uint64_t event_count, const CrossoverReport& report) {
  const auto cost = oracle_cost_lower_bound(event_count);
  if (cost < report.max_ops_per_oracle) return OracleVerdict::feasible;
  if (cost == report.max_ops_per_oracle) return OracleVerdict::at_limit;
  return OracleVerdict::infeasible;
}

}  // namespace catxl
