#ifndef GRFSWARM_BATCH_HPP_
#define GRFSWARM_BATCH_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "engine.hpp"
#include "metrics.hpp"
#include "scenario.hpp"

namespace grfswarm {

struct BatchSpec {
  int runs = 1;
  std::uint64_t base_seed = 0;
  int jobs = 1;
  std::optional<int> ticks;
};

/// Runs seeds base_seed .. base_seed + runs - 1 on up to `jobs` threads.
/// Results come back ordered by seed, whatever the scheduling.
/// `on_done` is called from worker threads as each run finishes.
inline std::vector<RunResult> run_batch(const Scenario &s, const BatchSpec &spec,
                                        std::function<void(const RunResult &)> on_done = {}) {
  std::vector<RunResult> results(static_cast<std::size_t>(std::max(spec.runs, 0)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < results.size(); k = next++) {
      const std::uint64_t seed = spec.base_seed + k;
      try {
        results[k] = run(s, seed, {.ticks = spec.ticks});
      } catch (const std::exception &e) {
        results[k].seed = seed;
        results[k].aborted = true;
        results[k].error = e.what();
      }
      if (on_done) on_done(results[k]);
    }
  };
  const int jobs = std::clamp(spec.jobs, 1, std::max(spec.runs, 1));
  std::vector<std::jthread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  pool.clear();
  return results;
}

/// Aggregates completed (non-aborted) runs, in seed order.
inline std::vector<AggregateRow> aggregate_completed(const std::vector<RunResult> &results) {
  std::vector<std::vector<MetricsFrame>> series;
  for (const auto &r : results)
    if (!r.aborted) series.push_back(r.metrics_series);
  return aggregate_runs(series);
}

} // namespace grfswarm

#endif // GRFSWARM_BATCH_HPP_
