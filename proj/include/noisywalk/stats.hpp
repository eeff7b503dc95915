#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>

namespace noisywalk {

inline constexpr double kZ95 = 1.959963984540054;

/// Point estimate with its sampling uncertainty and everything needed to
/// reproduce it.  `rho` is NaN when the estimate is not tied to a noise level.
struct EstimateResult {
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::string method;
  double rho = std::numeric_limits<double>::quiet_NaN();
};

/// Mean, standard error and normal 95% interval of i.i.d. samples.
/// The mean is accumulated as shifts from the first sample, so a constant
/// sample yields exactly that constant with zero error.
EstimateResult summarize(std::span<const double> samples, std::string method, int n,
                         std::uint64_t seed);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ95);

/// Newcombe's hybrid score interval for p1 - p2 from two independent
/// binomial samples.
Interval newcombe_difference(std::int64_t successes1, std::int64_t trials1,
                             std::int64_t successes2, std::int64_t trials2, double z = kZ95);

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace noisywalk
