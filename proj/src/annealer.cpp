#include "catxl/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "catxl/synthetic.hpp"

namespace catxl {

namespace {

void insert_ranked(std::vector<RankedContract>& best, RankedContract candidate, std::size_t keep) {
  const auto key = candidate.contract.key();
  for (const auto& b : best) {
    if (b.contract.key() == key) return;
  }
  if (best.size() >= keep && !ranks_before(candidate, best.back())) return;
  auto pos = std::upper_bound(best.begin(), best.end(), candidate, ranks_before);
  best.insert(pos, std::move(candidate));
  if (best.size() > keep) best.pop_back();
}

Contract empty_contract(const StateSpaceBounds& bounds, std::size_t num_perils) {
  Contract c;
  c.grouping = bounds.groupings.empty() ? PerilGrouping::singletons(num_perils)
                                        : bounds.groupings.front();
  c.canonicalize();
  return c;
}

struct ChainResult {
  ChainOutput output;
  std::vector<RankedContract> best;
};

ChainResult run_chain(Evaluator& evaluator, const StateSpaceBounds& bounds,
                      const AnnealSchedule& schedule, const Contract* start,
                      const AnnealOptions& options, std::size_t chain) {
  const auto& names = evaluator.store().peril_names();
  Rng rng(chain_seed(schedule.seed, chain));
  Contract current = start ? *start : empty_contract(bounds, names.size());
  current.canonicalize();
  if (auto why = bounds.violation(current, names); !why.empty()) {
    throw ConfigError("start contract outside the state-space bounds: " + why);
  }
  const bool build_phase = start == nullptr || start->layers.empty();
  const auto phase_steps = static_cast<std::size_t>(
      std::floor(schedule.initial_phase_fraction * static_cast<double>(schedule.steps)));

  ChainResult res;
  auto report = evaluator.evaluate(current);
  double best = -std::numeric_limits<double>::infinity();
  auto record = [&](const Contract& c, const RiskReport& r) {
    if (!r.feasible) return;
    best = std::max(best, r.objective);
    insert_ranked(res.best, {c, r}, options.keep_best);
  };
  record(current, report);

  res.output.trace.reserve(schedule.steps);
  for (std::size_t k = 0; k < schedule.steps; ++k) {
    const double temp = temperature(k, schedule);
    const double bias = build_phase && k < phase_steps ? schedule.build_bias : 1.0;
    auto proposal = propose(current, bounds, names, options.weights, rng, bias);
    if (options.check_invariants) {
      if (auto why = bounds.violation(proposal.contract, names); !why.empty()) {
        throw Error(std::string("move ") + to_string(proposal.kind) + " left the bounds: " + why);
      }
    }
    auto candidate = evaluator.evaluate(proposal.contract);
    const bool accepted =
        metropolis_accept(candidate.objective - report.objective, temp, rng);
    if (accepted) {
      current = std::move(proposal.contract);
      report = std::move(candidate);
      record(current, report);
    }
    res.output.trace.push_back(
        {k, report.objective, temp, proposal.kind, accepted, chain, best});
    if (options.space_every > 0 && k % options.space_every == 0) {
      res.output.space.push_back({report.tvar, report.avg_net_profit, report.feasible});
    }
  }
  return res;
}

}  // namespace

void AnnealSchedule::validate() const {
  if (!(t_initial > 0.0) || !(t_final > 0.0) || !(t_final < t_initial)) {
    throw ConfigError("schedule: need 0 < t_final < t_initial");
  }
  if (steps < 1) throw ConfigError("schedule: steps must be >= 1");
  if (restarts < 1) throw ConfigError("schedule: restarts must be >= 1");
  if (!(build_bias > 0.0)) throw ConfigError("schedule: build_bias must be positive");
  if (!(initial_phase_fraction >= 0.0 && initial_phase_fraction <= 1.0)) {
    throw ConfigError("schedule: initial_phase_fraction must lie in [0, 1]");
  }
}

double AnnealSchedule::cooling_factor() const {
  return std::pow(t_final / t_initial, 1.0 / static_cast<double>(steps));
}

double temperature(std::size_t k, const AnnealSchedule& s) {
  if (k == 0) return s.t_initial;
  if (k >= s.steps) return s.t_final;
  return s.t_initial *
         std::pow(s.t_final / s.t_initial, static_cast<double>(k) / static_cast<double>(s.steps));
}

bool metropolis_accept(double delta, double temperature, Rng& rng) {
  if (delta >= 0.0) return true;
  if (!(temperature > 0.0)) return false;
  return rng.uniform() < std::exp(delta / temperature);
}

bool ranks_before(const RankedContract& a, const RankedContract& b) {
  if (a.report.objective != b.report.objective) return a.report.objective > b.report.objective;
  if (a.report.tvar != b.report.tvar) return a.report.tvar < b.report.tvar;
  if (a.contract.layers.size() != b.contract.layers.size()) {
    return a.contract.layers.size() < b.contract.layers.size();
  }
  return a.contract.key() < b.contract.key();
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(chain));
}

AnnealResult anneal(Evaluator& evaluator, const StateSpaceBounds& bounds,
                    const AnnealSchedule& schedule, const std::vector<Contract>& starts,
                    const AnnealOptions& options, const ChainSink& sink) {
  schedule.validate();
  options.weights.validate();
  if (bounds.boundary_grid.size() < 2) throw ConfigError("bounds: boundary grid is empty");

  const std::size_t chains = schedule.restarts;
  std::vector<std::optional<ChainResult>> results(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::mutex mu;
  std::size_t emitted = 0;

  // Emits finished chains in chain order.
  auto flush = [&]() {
    while (emitted < chains && results[emitted]) {
      if (sink) sink(emitted, results[emitted]->output);
      ++emitted;
    }
  };
  auto work = [&](std::size_t c) {
    try {
      const Contract* start = starts.empty() ? nullptr : &starts[c % starts.size()];
      auto r = run_chain(evaluator, bounds, schedule, start, options, c);
      std::lock_guard lock(mu);
      results[c] = std::move(r);
      flush();
    } catch (...) {
      std::lock_guard lock(mu);
      errors[c] = std::current_exception();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads,
                                                           static_cast<unsigned>(chains)));
  if (threads == 1) {
    for (std::size_t c = 0; c < chains; ++c) {
      work(c);
      if (errors[c]) std::rethrow_exception(errors[c]);
    }
  } else {
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t c;
          {
            std::lock_guard lock(mu);
            if (next >= chains) return;
            c = next++;
          }
          work(c);
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  AnnealResult out;
  for (auto& r : results) {
    for (auto& b : r->best) insert_ranked(out.best, std::move(b), options.keep_best);
    out.chains.push_back(std::move(r->output));
  }
  out.cache = evaluator.stats();
  return out;
}

}  // namespace catxl
