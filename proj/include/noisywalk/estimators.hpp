#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisywalk/convolution.hpp"
#include "noisywalk/measure.hpp"
#include "noisywalk/stats.hpp"

namespace noisywalk {

/// Drift of a coupled walk: the combined speed d_×(o, Z_n)/n and the speed
/// of each coordinate.  For a single-kind step `second` is identically 0.
struct DriftEstimate {
  EstimateResult combined;
  EstimateResult first;
  EstimateResult second;
};

/// Monte Carlo speed over `trials` independent walks of length n.  Trial t
/// uses Philox stream t of `seed`, so results do not depend on `workers`
/// (0 = default).  Throws InputError when n < 1 or trials < 2.
DriftEstimate drift_mc(const FiniteMeasure& step, int n, std::int64_t trials, std::uint64_t seed,
                       unsigned workers = 0);

/// H(step^k) for k = 1..n_max.
struct EntropyCurve {
  std::vector<double> values;          // values[k-1] = H(step^k)
  std::vector<Truncation> truncation;  // per level; truncated levels are bracketed
  std::vector<double> increments;      // H_k − H_{k−1}, H_0 = 0
  double upper_rate = 0.0;             // min over untruncated k of H_k / k
  bool exact = false;                  // every level used exact arithmetic

  bool truncated(int k) const { return truncation.at(static_cast<std::size_t>(k - 1)).truncated; }
};

EntropyCurve entropy_exact_curve(const FiniteMeasure& step, int n_max,
                                 const ConvolutionOptions& options = {});

/// Rate bracket from an entropy curve: h_upper = min H_k/k and h_increment
/// = the last increment between two untruncated levels.  Increments never
/// grow along a random walk, so h_increment ≤ h ≤ h_upper.  Throws
/// InputError when fewer than two untruncated levels are available.
struct RateBracket {
  double h_upper = 0.0;
  double h_increment = 0.0;
  int n_used = 0;
};

RateBracket entropy_rate_estimate(const EntropyCurve& curve);

/// Pointwise Shannon estimator −(1/n)·log π^ρ_n(w̄_n) for the uniform step on
/// m free semigroup generators.  Each positive word has a unique spelling,
/// so π_n of the sampled pair is a product of one-step masses and depends
/// only on the number k of matching positions.  Throws
/// UnsupportedRegimeError for any other μ.
EstimateResult shannon_pointwise(const FiniteMeasure& mu, double rho, int n, std::int64_t trials,
                                 std::uint64_t seed, unsigned workers = 0);
EstimateResult shannon_pointwise(int m, double rho, int n, std::int64_t trials, std::uint64_t seed,
                                 unsigned workers = 0);

/// Alphabet size when `mu` is uniform on m ≥ 2 distinct single positive
/// letters; nullopt otherwise.
std::optional<int> semigroup_alphabet(const FiniteMeasure& mu);

/// ‖π^ρ_n − μ_n×μ_n‖_TV = 1 − Σ min(π_n(u,v), μ_n(u)μ_n(v)).  Computed in
/// exact arithmetic whenever μ carries exact masses.  When every atom of an
/// exact μ is a single positive letter both laws are products over the n
/// positions and the sum runs over mass classes instead of words.
/// Otherwise throws TruncationError when a convolution level exceeds `cap`
/// atoms.
double tv_exact(const FiniteMeasure& mu, double rho, int n, std::size_t cap = std::size_t{1} << 23);

/// The same distance by explicit convolution of both walks, whatever μ is.
double tv_exact_convolution(const FiniteMeasure& mu, double rho, int n,
                            std::size_t cap = std::size_t{1} << 23);

/// Lower bound |P_π(A) − P_{μ×μ}(A)| ≤ TV for the event A = {(Z¹_n | Z²_n) ≥ ⌈c·n⌉}.
/// Coupled and independent walks use separate Philox purposes of `seed`.
struct TvLowerBound {
  EstimateResult bound;  // CI: Newcombe interval for the difference
  double p_coupled = 0.0;
  double p_independent = 0.0;
  int threshold = 0;
};

TvLowerBound tv_lower_bound_mc(const FiniteMeasure& mu, double rho, int n, double c,
                               std::int64_t trials, std::uint64_t seed, unsigned workers = 0);

/// Grid of noise levels: a:b:step inclusive of b up to rounding.
std::vector<double> parse_rho_grid(std::string_view spec);

struct SweepParams {
  std::uint64_t seed = 0;
  // entropy: pointwise estimator for semigroup steps, exact curve otherwise
  int entropy_n = 2000;
  std::int64_t entropy_trials = 200;
  int entropy_n_max = 6;
  std::size_t cap = std::size_t{1} << 23;
  // drift
  int drift_n = 500;
  std::int64_t drift_trials = 200;
  // TV at these n (exact)
  std::vector<int> tv_n;
  unsigned workers = 0;
};

struct SweepRow {
  double rho = 0.0;
  EstimateResult entropy;
  std::optional<double> entropy_closed_form;
  EstimateResult drift;
  std::vector<std::pair<int, double>> tv;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

/// Evaluates every grid point with the same seed, so neighbouring rows share
/// random numbers.  The grid must be strictly increasing within [0, 1].
SweepTable rho_sweep(const FiniteMeasure& mu, std::span<const double> grid,
                     const SweepParams& params);

struct RhoStar {
  double rho_star = 0.0;
  double margin = 0.0;
  bool warning = false;  // no grid point below 1 separates from h(π¹)
  std::string message;
};

/// Default separation margin: three standard errors of the ρ = 1 estimate.
double default_rho_star_margin(const SweepTable& table);

/// Scans the grid upward from its smallest ρ and returns the last point of
/// the initial run with h(π^ρ) < h(π¹) − margin.  Requires a row at ρ = 1.
RhoStar rho_star_estimate(const SweepTable& table, std::optional<double> margin = std::nullopt);

}  // namespace noisywalk
