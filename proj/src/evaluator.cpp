#include "catxl/evaluator.hpp"

#include <charconv>

namespace catxl {

namespace {

std::string layer_key(const PerilGroup& group, const Layer& layer) {
  std::string key;
  char buf[32];
  auto num = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    key.append(buf, res.ptr);
  };
  for (const auto& s : group.subgroups) {
    for (auto p : s.perils) {
      key += std::to_string(p);
      key += ',';
    }
    key += '@';
    num(s.shift);
    key += ';';
  }
  key += '|';
  num(layer.attachment);
  key += ':';
  num(layer.limit);
  return key;
}

}  // namespace

Evaluator::Evaluator(const CumulativeLossStore& store, Pricing pricing,
                     std::vector<ConstraintSpec> constraints, RiskOptions options,
                     CacheConfig cache)
    : store_(store),
      pricing_(std::move(pricing)),
      options_(std::move(options)),
      cache_config_(cache),
      layer_cache_(cache.enabled ? cache.layer_capacity : 0),
      contract_cache_(cache.enabled ? cache.contract_capacity : 0) {
  pricing_.validate();
  for (const auto& c : constraints) c.validate();
  Contract empty;
  empty.grouping = PerilGrouping::singletons(store_.num_perils());
  const auto base = evaluate_contract(empty, store_, pricing_);
  constraints_ = resolve_penalty_scales(std::move(constraints), base.avg_net_profit);
  baseline_ = assess(empty, base, store_, constraints_, options_);
}

std::shared_ptr<const std::vector<Currency>> Evaluator::layer_recovery(const PerilGroup& group,
                                                                       const Layer& layer) {
  if (!cache_config_.enabled) {
    return std::make_shared<const std::vector<Currency>>(
        uncapped_layer_recovery(store_, group, layer.attachment, layer.limit));
  }
  const auto key = layer_key(group, layer);
  if (auto hit = layer_cache_.get(key)) return *hit;
  auto value = std::make_shared<const std::vector<Currency>>(
      uncapped_layer_recovery(store_, group, layer.attachment, layer.limit));
  layer_cache_.put(key, value);
  return value;
}

YearlyResult Evaluator::yearly(const Contract& contract) {
  contract.validate(store_.num_perils());
  return evaluate_contract(contract, store_, pricing_,
                           [this](const PerilGroup& g, const Layer& l) {
                             return layer_recovery(g, l);
                           });
}

RiskReport Evaluator::compute(const Contract& contract) {
  const auto y = yearly(contract);
  return assess(contract, y, store_, constraints_, options_);
}

RiskReport Evaluator::evaluate(const Contract& contract) {
  if (!cache_config_.enabled) return compute(contract);
  const auto key = contract.key();
  if (auto hit = contract_cache_.get(key)) return **hit;
  auto report = std::make_shared<const RiskReport>(compute(contract));
  contract_cache_.put(key, report);
  return *report;
}

CacheStats Evaluator::stats() const {
  return {layer_cache_.hits(), layer_cache_.misses(), contract_cache_.hits(),
          contract_cache_.misses()};
}

}  // namespace catxl
