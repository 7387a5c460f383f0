#ifndef CATXL_RISK_HPP
#define CATXL_RISK_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catxl/contract.hpp"

namespace catxl {

// Nearest rank: the ceil(beta * n)-th smallest value.
double percentile(std::span<const double> values, double beta);
// Mean of the values strictly above the beta-percentile; the percentile itself
// when no value exceeds it.
double tvar(std::span<const double> values, double beta);
double aep(std::span<const double> net_losses, double beta);
// Fraction of years with a positive recovery.
double attachment_probability(std::span<const double> recoveries);
// -scale * max(0, value - threshold)
double penalty(double value, double threshold, double scale);
// Return period in years -> percentile level 1 - 1/years.
double beta_from_return_period(double years);

// Rank (1-based) used by percentile(); shared with code that needs the same
// order statistic without sorting.
std::size_t nearest_rank(std::size_t n, double beta);

// Yearly largest single event of peril p, net of every layer of its tower
// applied to that event in isolation.
std::vector<Currency> net_max_events(const Contract& contract, const CumulativeLossStore& store,
                                     PerilId p);

enum class ConstraintKind { tvar, aep, oep, attach_prob };

const char* to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(const std::string& s);

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::tvar;
  double beta = 0.995;
  // Name of a peril; restricts the constraint to that peril's group (or, for
  // OEP, to the peril itself). Empty means all perils.
  std::string peril;
  double threshold = 0.0;
  // Unset means: derived from the no-reinsurance baseline (see resolve).
  std::optional<double> penalty_scale;

  void validate() const;
  std::string label() const;
};

struct RiskOptions {
  double tvar_beta = 0.995;
  std::vector<double> aep_betas{0.8, 0.9, 0.98};
  std::vector<double> oep_betas{0.995};
};

struct ConstraintResult {
  ConstraintSpec spec;
  double value = 0.0;
  double penalty = 0.0;
  bool satisfied = true;  // value strictly below the threshold
};

struct RiskReport {
  Currency avg_net_profit = 0.0;
  Currency tvar = 0.0;
  std::vector<std::pair<double, Currency>> aep;  // (beta, value)
  struct Oep {
    double beta;
    PerilId peril;
    Currency value;
  };
  std::vector<Oep> oep;
  std::vector<double> attach_prob;  // per layer
  std::vector<ConstraintResult> constraints;
  Currency objective = 0.0;
  bool feasible = true;
};

// Fills in missing penalty scales so that a violation of 1% of the threshold
// costs 1% of |baseline_profit|.
std::vector<ConstraintSpec> resolve_penalty_scales(std::vector<ConstraintSpec> constraints,
                                                   Currency baseline_profit);

double constraint_value(const ConstraintSpec& spec, const Contract& contract,
                        const YearlyResult& yearly, const CumulativeLossStore& store);

RiskReport assess(const Contract& contract, const YearlyResult& yearly,
                  const CumulativeLossStore& store, std::span<const ConstraintSpec> constraints,
                  const RiskOptions& options = {});

}  // namespace catxl

#endif  // CATXL_RISK_HPP
