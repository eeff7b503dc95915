#include "noisywalk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "noisywalk/errors.hpp"
#include "noisywalk/stats.hpp"

namespace noisywalk {

void SemigroupParams::validate() const {
  if (m < 2) throw InputError("semigroup alphabet size must be >= 2");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("rho must lie in [0, 1]");
}

double SemigroupParams::diagonal_mass() const {
  const double md = m;
  return (1.0 - rho) / md + rho / (md * md);
}

double SemigroupParams::off_diagonal_mass() const {
  const double md = m;
  return rho / (md * md);
}

double SemigroupParams::match_probability() const { return (1.0 - rho) + rho / m; }

double h_semigroup(const SemigroupParams& p) {
  p.validate();
  const double log_m = std::log(static_cast<double>(p.m));
  if (p.rho == 0.0) return log_m;
  if (p.rho == 1.0) return 2.0 * log_m;
  const double b = (p.m - 1.0) * p.rho / p.m;
  const double a = 1.0 - b;
  return log_m - a * std::log(a) - b * std::log(p.rho / p.m);
}

double h_semigroup_derivative(const SemigroupParams& p) {
  p.validate();
  if (p.rho == 0.0) return std::numeric_limits<double>::infinity();
  const double c = (p.m - 1.0) / p.m;
  const double a = 1.0 - c * p.rho;
  return c * std::log(a * p.m / p.rho);
}

double tv_semigroup(const SemigroupParams& p, int n) {
  p.validate();
  if (n < 1) throw InputError("tv_semigroup: n must be >= 1");
  const double success_coupled = p.match_probability();
  const double success_indep = 1.0 / p.m;

  auto log_pmf = [n](int k, double s) {
    const double log_choose =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    const double a = k == 0 ? 0.0 : k * std::log(s);
    const double b = n - k == 0 ? 0.0 : (n - k) * std::log1p(-s);
    return log_choose + a + b;
  };

  // ½Σ|P−Q| is accurate for small distances, 1 − Σmin(P,Q) near 1.
  CompensatedSum abs_sum, min_sum;
  for (int k = 0; k <= n; ++k) {
    // A failure probability of zero (rho = 0) leaves only k = n.
    const double lp = (success_coupled == 1.0 && k < n)
                          ? -std::numeric_limits<double>::infinity()
                          : log_pmf(k, success_coupled);
    const double lq = log_pmf(k, success_indep);
    const double a = std::exp(lp), b = std::exp(lq);
    abs_sum.add(std::abs(a - b));
    min_sum.add(std::min(a, b));
  }
  const double half = 0.5 * abs_sum.value();
  if (half <= 0.5) return half;
  return std::clamp(1.0 - min_sum.value(), 0.0, 1.0);
}

double semigroup_cylinder_log_mass(const SemigroupParams& p, const Word& u, const Word& v) {
  p.validate();
  if (u.length() != v.length()) throw InputError("cylinder prefixes must have equal length");
  if (!u.is_positive() || !v.is_positive())
    throw UnsupportedRegimeError("semigroup cylinder mass needs positive words");
  int matches = 0;
  for (std::size_t i = 0; i < u.length(); ++i) matches += u[i] == v[i];
  const int misses = static_cast<int>(u.length()) - matches;
  const double q = p.off_diagonal_mass();
  if (misses > 0 && q == 0.0) return -std::numeric_limits<double>::infinity();
  return matches * std::log(p.diagonal_mass()) + (misses == 0 ? 0.0 : misses * std::log(q));
}

double semigroup_cylinder_mass(const SemigroupParams& p, const Word& u, const Word& v) {
  return std::exp(semigroup_cylinder_log_mass(p, u, v));
}

double drift_free_group_srw(int k) {
  if (k < 2) throw InputError("drift_free_group_srw: rank must be >= 2 (non-elementary)");
  return (k - 1.0) / k;
}

FiniteMeasure brute_force_convolution(const FiniteMeasure& step, int n, std::size_t budget) {
  if (n < 1) throw InputError("brute_force_convolution: n must be >= 1");
  const std::size_t s = step.size();
  double sequences = std::pow(static_cast<double>(s), n);
  if (sequences > static_cast<double>(budget))
    throw BudgetError("brute_force_convolution: " + std::to_string(s) + "^" + std::to_string(n) +
                      " sequences exceed the budget");

  const int rank = step.rank();
  const bool exact = step.is_exact();
  std::map<WordPair, BigInt> exact_mass;
  std::map<WordPair, double> float_mass;
  BigInt denominator = 1;
  if (exact)
    for (int i = 0; i < n; ++i) denominator *= step.exact().denominator();

  std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
  for (;;) {
    WordPair pos{Word(rank), Word(rank)};
    BigInt num = 1;
    double w = 1.0;
    for (std::size_t d : digits) {
      pos = multiply(pos, step.element(d));
      if (exact)
        num *= step.exact().numerator(d);
      else
        w *= step.weight(d);
    }
    if (exact)
      exact_mass[pos] += num;
    else
      float_mass[pos] += w;

    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == s) digits[i++] = 0;
    if (i == digits.size()) break;
  }

  if (exact) {
    if (step.kind() == MeasureKind::pair) {
      std::vector<std::pair<WordPair, Rational>> support;
      for (auto& [k, v] : exact_mass) support.emplace_back(k, Rational(v, denominator));
      return FiniteMeasure::build_pair(rank, support);
    }
    std::vector<std::pair<Word, Rational>> support;
    for (auto& [k, v] : exact_mass) support.emplace_back(k.first, Rational(v, denominator));
    return FiniteMeasure::build(rank, support);
  }
  if (step.kind() == MeasureKind::pair) {
    std::vector<std::pair<WordPair, double>> support(float_mass.begin(), float_mass.end());
    return FiniteMeasure::build_pair(rank, support);
  }
  std::vector<std::pair<Word, double>> support;
  for (auto& [k, v] : float_mass) support.emplace_back(k.first, v);
  return FiniteMeasure::build(rank, support);
}

}  // namespace noisywalk
