#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

namespace noisywalk {

/// Number of worker threads to use when a caller passes 0.
unsigned default_workers() noexcept;
void set_default_workers(unsigned workers) noexcept;

/// Evaluates `fn(trial)` for every trial in [0, trials) and returns the
/// results indexed by trial.  Trials are split into contiguous chunks over
/// `workers` threads; since each result lands in its own slot the output
/// never depends on scheduling.
template <typename Fn>
auto run_trials(std::size_t trials, unsigned workers, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out(trials);
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(trials, 1)));
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) out[t] = fn(t);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t t = begin; t < end; ++t) out[t] = fn(t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Pairwise (cascade) summation in a fixed tree order.
double pairwise_sum(std::span<const double> values) noexcept;

}  // namespace noisywalk
