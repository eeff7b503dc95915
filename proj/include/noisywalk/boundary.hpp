#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "noisywalk/measure.hpp"
#include "noisywalk/stats.hpp"

namespace noisywalk {

/// Finite-horizon proxy for a point of ∂Γ×∂Γ: the prefixes of each
/// coordinate shared by the positions at times N and 2N.
struct BoundarySample {
  Word prefix1;
  Word prefix2;
  int t_stable = 0;  // min of the two prefix lengths
  bool unstable = false;  // t_stable == 0: nothing is known about the limit
};

/// M coupled walks of length 2N driven by π^ρ.  Sample i uses Philox stream
/// i of `seed`, so the result is independent of `workers`.
std::vector<BoundarySample> sample_boundary(const FiniteMeasure& mu, double rho, int horizon,
                                            std::int64_t samples, std::uint64_t seed,
                                            unsigned workers = 0);

/// Counts of boundary samples by pairs of cylinder prefixes up to a depth.
///
/// Sample i contributes the interleaved sequence a₁b₁a₂b₂… of its prefixes,
/// cut at min(t_stable, depth).  Kept sorted, the samples that share a
/// depth-t node form one contiguous range, found by binary search.
class CylinderTree {
 public:
  struct Node {
    Word prefix1;
    Word prefix2;
    int depth = 0;
    std::int64_t count = 0;
  };

  CylinderTree(std::span<const BoundarySample> samples, int depth);

  std::int64_t total() const noexcept { return static_cast<std::int64_t>(offsets_.size()) - 1; }
  int depth() const noexcept { return depth_; }

  /// Number of samples whose prefixes extend (p1, p2) cut at depth t.
  /// Samples stable to fewer than t letters are not counted.
  std::int64_t count(const Word& p1, const Word& p2, int t) const;

  /// Every node with a positive count, in depth-first order.  The root is
  /// the pair of identities at depth 0.
  std::vector<Node> nodes() const;

  /// Text export: one "prefix1 prefix2 count" line per node, prefixes as
  /// comma-separated signed indices and "e" for the identity.
  void write(std::ostream& out) const;

 private:
  std::span<const Letter> sequence(std::size_t i) const {
    return {letters_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  int rank_ = 0;
  int depth_ = 0;
  std::vector<Letter> letters_;       // sequences, in sorted order
  std::vector<std::size_t> offsets_;  // size total()+1
};

/// ν̂(C_t(center)) = count / total.  Throws InputError when t exceeds the
/// center's stable depth or the tree depth.
double ball_measure(const CylinderTree& tree, const BoundarySample& center, int t);

struct LocalDimension {
  EstimateResult slope;  // mean over centers of the per-center OLS slope
  std::int64_t centers_used = 0;
  std::int64_t centers_skipped = 0;  // fewer than two usable radii
  std::int64_t dropped_points = 0;   // leave-one-out count was zero
};

/// Slope of −log ν̂(C_t(ξ)) against t, averaged over `centers` sample
/// points chosen with Philox purpose kCenters of `seed`.  `samples` must be
/// the samples the tree was built from: the center itself is removed from
/// each count (leave-one-out), so ν̂ = (count − 1)/(M − 1).
LocalDimension local_dimension(std::span<const BoundarySample> samples, const CylinderTree& tree,
                               std::span<const int> t_grid, std::int64_t centers,
                               std::uint64_t seed);

/// Same centers measured in a second, independent tree (no leave-one-out).
LocalDimension cross_local_dimension(std::span<const BoundarySample> samples,
                                     const CylinderTree& other, std::span<const int> t_grid,
                                     std::int64_t centers, std::uint64_t seed);

struct SingularityParams {
  int horizon = 400;
  std::int64_t samples = 20000;
  std::vector<int> t_grid;  // default 1..horizon/4
  std::int64_t centers = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

struct SingularityReport {
  LocalDimension dim_a;      // ν_{π^ρ} at its own samples
  LocalDimension dim_b;      // ν_{π^ρ'} at its own samples
  LocalDimension dim_cross;  // ν_{π^ρ'} around ν_{π^ρ}-typical points
  double gap = 0.0;          // paired mean of dim_b − dim_a slopes
  double gap_std_error = 0.0;
  Interval gap_ci;
  bool conclusive = false;   // gap CI excludes 0
};

/// Compares the two boundary measures through their local dimensions.
/// Both sample sets share Philox streams and the same centers are used for
/// both, so the gap is a paired difference; ρ = ρ' gives exactly zero.
SingularityReport dimension_singularity_check(const FiniteMeasure& mu, double rho,
                                              double rho_prime, const SingularityParams& params);

}  // namespace noisywalk
