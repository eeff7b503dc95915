#pragma once

#include <cstddef>

#include "noisywalk/measure.hpp"

namespace noisywalk {

/// Uniform μ on m free semigroup generators, coupled at noise level rho.
struct SemigroupParams {
  int m = 2;
  double rho = 0.0;

  void validate() const;  // m >= 2, rho in [0,1]
  /// Mass of each diagonal atom (a,a) of π^ρ: (1−ρ)/m + ρ/m².
  double diagonal_mass() const;
  /// Mass of each off-diagonal atom (a,b): ρ/m².
  double off_diagonal_mass() const;
  /// Probability that one step of π^ρ puts the same letter in both
  /// coordinates: (1−ρ) + ρ/m.
  double match_probability() const;
};

/// Asymptotic entropy of π^ρ in the free semigroup, in nats:
///   log m − (1 − (m−1)ρ/m)·log(1 − (m−1)ρ/m) − ((m−1)ρ/m)·log(ρ/m).
/// The endpoints return log m and 2·log m exactly.
double h_semigroup(const SemigroupParams& p);

/// d/dρ of h_semigroup: ((m−1)/m)·log(m(1 − (m−1)ρ/m)/ρ); +∞ at ρ = 0.
double h_semigroup_derivative(const SemigroupParams& p);

/// ‖π^ρ_n − μ_n×μ_n‖_TV in the free semigroup.  The number k of matching
/// positions is sufficient, so this is the TV distance between
/// Binomial(n, (1−ρ)+ρ/m) and Binomial(n, 1/m), summed in log space with
/// compensation.
double tv_semigroup(const SemigroupParams& p, int n);

/// Exact π^ρ mass of the depth-t cylinder pair (u, v) in the free semigroup:
/// p^k q^(t−k) with k the number of matching positions.  Prefixes must have
/// equal length and use positive letters.
double semigroup_cylinder_mass(const SemigroupParams& p, const Word& u, const Word& v);
/// Its logarithm, which stays finite at depths where the mass underflows.
double semigroup_cylinder_log_mass(const SemigroupParams& p, const Word& u, const Word& v);

/// Speed (k−1)/k of the simple random walk on F_k.  Throws InputError for
/// k < 2.
double drift_free_group_srw(int k);

/// Reference n-fold convolution by enumerating all |supp|ⁿ increment
/// sequences.  Exact when `step` is exact.  Throws BudgetError when
/// |supp|ⁿ exceeds `budget`.
FiniteMeasure brute_force_convolution(const FiniteMeasure& step, int n,
                                      std::size_t budget = 10'000'000);

}  // namespace noisywalk
