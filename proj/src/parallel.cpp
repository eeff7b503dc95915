#include "noisywalk/parallel.hpp"

#include <atomic>

namespace noisywalk {

namespace {
std::atomic<unsigned> g_default_workers{0};
}

unsigned default_workers() noexcept {
  const unsigned w = g_default_workers.load(std::memory_order_relaxed);
  if (w != 0) return w;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_workers(unsigned workers) noexcept {
  g_default_workers.store(workers, std::memory_order_relaxed);
}

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace noisywalk
