#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "catxl/bnb.hpp"

namespace catxl {

std::uint64_t census_seed(std::uint64_t seed, std::size_t n, std::size_t b, std::size_t instance) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(b));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  return splitmix64(h ^ static_cast<std::uint64_t>(instance));
}

CensusFit fit_tree_sizes(std::span<const double> bn, std::span<const double> nodes) {
  if (bn.size() != nodes.size() || bn.size() < 2) {
    throw DomainError("tree-size fit needs at least two paired points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(bn.size());
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const double x = bn[i];
    const double y = std::log(std::max(1.0, nodes[i])) / std::log(4.0);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("tree-size fit: all points share one b n value");
  CensusFit f;
  f.c1 = (n * sxy - sx * sy) / den;
  f.c0 = (sy - f.c1 * sx) / n;
  return f;
}

CensusResult run_census(const CensusConfig& config,
                        const std::function<void(const CensusRow&)>& progress) {
  struct Task {
    std::size_t n, b, instance;
  };
  std::vector<Task> tasks;
  for (auto b : config.bits) {
    if (b < 1) throw ConfigError("census: bits must be >= 1");
    for (std::size_t n = 2; n * b <= config.n_max; ++n) {
      for (std::size_t i = 0; i < config.instances; ++i) tasks.push_back({n, b, i});
    }
  }

  std::vector<CensusRow> rows(tasks.size());
  std::vector<bool> done(tasks.size(), false);
  std::vector<std::exception_ptr> errors(tasks.size());
  std::mutex mu;
  std::size_t next = 0, reported = 0;

  auto work = [&](std::size_t k) {
    const auto& task = tasks[k];
    CensusRow row;
    row.n = task.n;
    row.b = task.b;
    row.instance = task.instance;
    row.seed = census_seed(config.seed, task.n, task.b, task.instance);
    const auto start = std::chrono::steady_clock::now();
    SyntheticSpec spec = config.synthetic;
    spec.num_groups = static_cast<std::uint32_t>(task.n);
    spec.seed = row.seed;
    BnbConfig pc = config.problem;
    pc.groups = task.n;
    pc.bits = task.b;
    const auto problem = make_synthetic_problem(spec, pc);
    const auto result = solve_cascade(problem);
    row.nodes_visited = result.stats.nodes_visited;
    row.cascade_nodes = result.stats.cascade_nodes;
    row.reduction_factor = result.stats.reduction_factor;
    row.feasible = result.feasible;
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::lock_guard lock(mu);
    rows[k] = row;
    done[k] = true;
    // Progress is reported in task order.
    while (reported < tasks.size() && done[reported]) {
      if (progress) progress(rows[reported]);
      ++reported;
    }
  };
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard lock(mu);
        if (next >= tasks.size()) return;
        k = next++;
      }
      try {
        work(k);
      } catch (...) {
        std::lock_guard lock(mu);
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CensusResult out;
  out.rows = std::move(rows);
  std::vector<double> x, cascade, final_nodes;
  for (const auto& r : out.rows) {
    x.push_back(static_cast<double>(r.n * r.b));
    cascade.push_back(static_cast<double>(r.cascade_nodes));
    final_nodes.push_back(static_cast<double>(r.nodes_visited));
  }
  if (x.size() >= 2) {
    try {
      out.fit = fit_tree_sizes(x, cascade);
      out.fit_final = fit_tree_sizes(x, final_nodes);
    } catch (const DomainError&) {
      // a single b n value: no slope to fit
    }
  }
  return out;
}

}  // namespace catxl
