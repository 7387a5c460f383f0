#ifndef CATXL_EVALUATOR_HPP
#define CATXL_EVALUATOR_HPP

#include <memory>
#include <string>
#include <vector>

#include "catxl/lru_cache.hpp"
#include "catxl/risk.hpp"

namespace catxl {

struct CacheConfig {
  bool enabled = true;
  std::size_t layer_capacity = 4096;
  std::size_t contract_capacity = 4096;
};

struct CacheStats {
  std::uint64_t layer_hits = 0;
  std::uint64_t layer_misses = 0;
  std::uint64_t contract_hits = 0;
  std::uint64_t contract_misses = 0;
};

// Contract evaluation plus risk assessment against one store, with a
// two-tier cache: per-layer uncapped recovery vectors and whole-contract
// reports. Caching never changes results. Safe for concurrent use.
class Evaluator {
 public:
  Evaluator(const CumulativeLossStore& store, Pricing pricing,
            std::vector<ConstraintSpec> constraints, RiskOptions options = {},
            CacheConfig cache = {});

  const CumulativeLossStore& store() const noexcept { return store_; }
  const Pricing& pricing() const noexcept { return pricing_; }
  // Constraints with penalty scales resolved.
  const std::vector<ConstraintSpec>& constraints() const noexcept { return constraints_; }
  const RiskOptions& options() const noexcept { return options_; }
  // Report of the contract without layers.
  const RiskReport& baseline() const noexcept { return baseline_; }

  RiskReport evaluate(const Contract& contract);
  YearlyResult yearly(const Contract& contract);
  CacheStats stats() const;

 private:
  std::shared_ptr<const std::vector<Currency>> layer_recovery(const PerilGroup& group,
                                                              const Layer& layer);
  RiskReport compute(const Contract& contract);

  const CumulativeLossStore& store_;
  Pricing pricing_;
  std::vector<ConstraintSpec> constraints_;
  RiskOptions options_;
  CacheConfig cache_config_;
  LruCache<std::string, std::shared_ptr<const std::vector<Currency>>> layer_cache_;
  LruCache<std::string, std::shared_ptr<const RiskReport>> contract_cache_;
  RiskReport baseline_;
};

}  // namespace catxl

#endif  // CATXL_EVALUATOR_HPP
