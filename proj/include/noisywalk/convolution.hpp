#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "noisywalk/measure.hpp"

namespace noisywalk {

enum class Arithmetic {
  automatic,  // exact when the step is exact and n <= exact_max_n
  exact,
  floating,
};

enum class OverflowPolicy {
  error,     // throw TruncationError when a level exceeds the cap
  truncate,  // drop lowest-mass atoms and track the lost mass
};

struct ConvolutionOptions {
  std::size_t cap = std::size_t{1} << 23;
  OverflowPolicy on_overflow = OverflowPolicy::error;
  Arithmetic arithmetic = Arithmetic::automatic;
  int exact_max_n = 8;
};

/// [step, step², …, stepⁿ] under the group law of Γ (single) or Γ×Γ (pair).
///
/// Exact arithmetic keeps integer numerators over the common denominator
/// Dᵏ, where D is the step's denominator, using 64-bit words while Dⁿ fits
/// and arbitrary precision beyond.  Truncation forces floating arithmetic;
/// truncated levels are sub-probability measures whose Truncation record
/// brackets the true entropy by
///   (1−ε)·H(A) ≤ H ≤ (1−ε)·H(A) + ε·n·log|supp step| + h₂(ε),
/// A being the kept part renormalized and ε the lost mass.
std::vector<FiniteMeasure> convolve_power(const FiniteMeasure& step, int n,
                                          const ConvolutionOptions& options = {});

/// Convolution powers of several steps of the same rank computed against
/// one shared word table, so atoms of different families can be matched by
/// table id.  result[j][m-1] is steps[j]^m.
std::vector<std::vector<FiniteMeasure>> convolve_powers_shared(
    std::span<const FiniteMeasure* const> steps, int n, const ConvolutionOptions& options = {});

}  // namespace noisywalk
