#ifndef CATXL_CONTRACT_HPP
#define CATXL_CONTRACT_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catxl/compression.hpp"
#include "catxl/loss_store.hpp"

namespace catxl {

struct Subgroup {
  std::vector<PerilId> perils;
  Currency shift = 0.0;  // added to the base attachment of every layer

  friend bool operator==(const Subgroup&, const Subgroup&) = default;
};

struct PerilGroup {
  std::vector<Subgroup> subgroups;

  std::vector<PerilId> perils() const;
  PerilId lowest_peril() const;
  Currency min_shift() const;
  friend bool operator==(const PerilGroup&, const PerilGroup&) = default;
};

// Partition of the peril catalog into groups, each partitioned into subgroups.
struct PerilGrouping {
  std::vector<PerilGroup> groups;

  // One group (with one subgroup) per peril.
  static PerilGrouping singletons(std::size_t num_perils);
  // One group holding every peril.
  static PerilGrouping single_group(std::size_t num_perils);
  static PerilGrouping from_partition(const std::vector<std::vector<PerilId>>& partition);

  void validate(std::size_t num_perils) const;
  // Sorts perils, subgroups and groups by lowest peril id.
  void canonicalize();
  GroupMap group_map(std::size_t num_perils) const;
  std::optional<GroupId> group_of(PerilId p) const;

  friend bool operator==(const PerilGrouping&, const PerilGrouping&) = default;
};

struct Layer {
  Currency attachment = 0.0;  // base attachment, before subgroup shifts
  Currency limit = 0.0;
  std::uint32_t reinstatements = 0;
  GroupId group = 0;

  Currency top() const { return attachment + limit; }
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Contract {
  PerilGrouping grouping;
  std::vector<Layer> layers;  // sorted by (group, attachment) after canonicalize()

  // Layer indices of the tower of group g, bottom first.
  std::vector<std::size_t> tower(GroupId g) const;
  std::size_t num_groups() const { return grouping.groups.size(); }

  // Checks limits, reinstatements, A + shift >= 0 and tower contiguity.
  void validate(std::size_t num_perils) const;
  void canonicalize();
  // Stable textual key of the canonical form, used for caching and dedup.
  std::string key() const;

  friend bool operator==(const Contract&, const Contract&) = default;
};

// min(max(0, loss - A_eff), L)
Currency event_recovery(Currency loss, Currency effective_attachment, Currency limit);

struct PricingCurve {
  Currency rol_min = 0.01;
  std::vector<std::pair<double, double>> points;  // (lol, rol), lol ascending

  // rol_min + (1 + rho) * lol, represented by two points.
  static PricingCurve linear(double rol_min, double rho);
  void validate() const;
  // Linear interpolation; clamps to rol_min below the first point and
  // extends the last segment beyond the last point.
  double operator()(double lol) const;
};

enum class PricingMode { expected_value, curve };

struct Pricing {
  PricingMode mode = PricingMode::expected_value;
  double rho = 0.1;
  double rol_min = 0.01;
  std::optional<PricingCurve> curve;
  // Curves keyed by peril name; a layer uses the curve of the lowest peril
  // of its group that has one, else `curve`, else the linear default.
  std::map<std::string, PricingCurve> peril_curves;
  Currency gross_profit = 0.0;

  void validate() const;
  const PricingCurve* curve_for(const PerilGroup& group,
                                const std::vector<std::string>& peril_names) const;
};

Currency reinsurance_premium(Currency limit, Currency avg_recovery, const Pricing& pricing,
                             const PricingCurve* curve = nullptr);
// Pi_rein * min(r L, R) / L
Currency reinstatement_premium(Currency limit, std::uint32_t reinstatements,
                               Currency yearly_recovery, Currency premium);

struct LayerResult {
  std::vector<Currency> recovery;               // R_{t,l}, capped at (1 + r) L
  std::vector<Currency> reinstatement_premium;  // per year
  Currency avg_recovery = 0.0;
  Currency premium = 0.0;
};

struct YearlyResult {
  std::vector<LayerResult> layers;  // parallel to Contract::layers
  std::vector<Currency> gross;
  std::vector<Currency> retained;    // gross - sum R
  std::vector<Currency> net_loss;    // gross - sum (R - reinstatement premium)
  std::vector<Currency> net_profit;  // gross profit - net loss - sum premium
  Currency avg_net_profit = 0.0;
  Currency total_premium = 0.0;
};

Currency average(std::span<const double> values);

// Sum over the layer's perils of E(A + shift) - E(A + shift + L), without the
// aggregate cap. Summed subgroup by subgroup, perils in listed order.
std::vector<Currency> uncapped_layer_recovery(const CumulativeLossStore& store,
                                              const PerilGroup& group, Currency attachment,
                                              Currency limit);

// Supplies the uncapped recovery vector of a layer; lets callers plug in a cache.
using LayerRecoveryFn =
    std::function<std::shared_ptr<const std::vector<Currency>>(const PerilGroup&, const Layer&)>;

YearlyResult evaluate_contract(const Contract& contract, const CumulativeLossStore& store,
                               const Pricing& pricing, const LayerRecoveryFn& fetch = {});

}  // namespace catxl

#endif  // CATXL_CONTRACT_HPP
