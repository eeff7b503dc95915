#include "noisywalk/stats.hpp"

#include <cmath>
#include <vector>

#include "noisywalk/errors.hpp"
#include "noisywalk/parallel.hpp"

namespace noisywalk {

EstimateResult summarize(std::span<const double> samples, std::string method, int n,
                         std::uint64_t seed) {
  if (samples.empty()) throw InputError("summarize: no samples");
  const auto count = static_cast<double>(samples.size());
  const double anchor = samples.front();

  std::vector<double> shifted(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) shifted[i] = samples[i] - anchor;
  const double mean_shift = pairwise_sum(shifted) / count;
  const double mean = anchor + mean_shift;

  double variance = 0.0;
  if (samples.size() > 1) {
    for (auto& s : shifted) s = (s - mean_shift) * (s - mean_shift);
    variance = pairwise_sum(shifted) / (count - 1.0);
  }
  EstimateResult r;
  r.value = mean;
  r.std_error = std::sqrt(variance / count);
  r.ci_low = mean - kZ95 * r.std_error;
  r.ci_high = mean + kZ95 * r.std_error;
  r.n = n;
  r.trials = static_cast<std::int64_t>(samples.size());
  r.seed = seed;
  r.method = std::move(method);
  return r;
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw InputError("wilson_interval: need 0 <= successes <= trials, trials > 0");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

Interval newcombe_difference(std::int64_t successes1, std::int64_t trials1,
                             std::int64_t successes2, std::int64_t trials2, double z) {
  const double p1 = static_cast<double>(successes1) / static_cast<double>(trials1);
  const double p2 = static_cast<double>(successes2) / static_cast<double>(trials2);
  const Interval w1 = wilson_interval(successes1, trials1, z);
  const Interval w2 = wilson_interval(successes2, trials2, z);
  const double d = p1 - p2;
  return {d - std::hypot(p1 - w1.low, w2.high - p2), d + std::hypot(w1.high - p1, p2 - w2.low)};
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace noisywalk
