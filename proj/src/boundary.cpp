#include "noisywalk/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>

#include "noisywalk/errors.hpp"
#include "noisywalk/parallel.hpp"
#include "walker.hpp"

namespace noisywalk {

std::vector<BoundarySample> sample_boundary(const FiniteMeasure& mu, double rho, int horizon,
                                            std::int64_t samples, std::uint64_t seed,
                                            unsigned workers) {
  if (mu.kind() != MeasureKind::single) throw InputError("sample_boundary: expected a measure on Γ");
  if (horizon < 1) throw InputError("sample_boundary: horizon must be >= 1");
  if (samples < 1) throw InputError("sample_boundary: need at least one sample");
  const int rank = mu.rank();
  const detail::Walker walker(build_pi_rho(mu, rho));
  return run_trials(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
    Philox4x32 rng(seed, i, purpose::kWalk);
    detail::LetterStack x, y;
    for (int s = 0; s < horizon; ++s) walker.step(rng, x, y);
    const std::vector<Letter> x_mid = x.letters, y_mid = y.letters;
    for (int s = 0; s < horizon; ++s) walker.step(rng, x, y);
    const std::size_t k1 = detail::common_prefix(x_mid, x.letters);
    const std::size_t k2 = detail::common_prefix(y_mid, y.letters);
    BoundarySample b;
    b.prefix1 = Word::reduce(std::span<const Letter>(x_mid.data(), k1), rank);
    b.prefix2 = Word::reduce(std::span<const Letter>(y_mid.data(), k2), rank);
    b.t_stable = static_cast<int>(std::min(k1, k2));
    b.unstable = b.t_stable == 0;
    return b;
  });
}

namespace {

// Three-way comparison of `s` cut at `limit` letters against `q`; a proper
// prefix of q compares less.
int compare_prefix(std::span<const Letter> s, std::span<const Letter> q) {
  const std::size_t n = std::min(s.size(), q.size());
  for (std::size_t i = 0; i < n; ++i)
    if (s[i] != q[i]) return s[i] < q[i] ? -1 : 1;
  return s.size() < q.size() ? -1 : 0;
}

std::vector<Letter> interleave(const Word& p1, const Word& p2, int t) {
  std::vector<Letter> q;
  q.reserve(2 * static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) {
    q.push_back(p1[static_cast<std::size_t>(i)]);
    q.push_back(p2[static_cast<std::size_t>(i)]);
  }
  return q;
}

}  // namespace

CylinderTree::CylinderTree(std::span<const BoundarySample> samples, int depth) : depth_(depth) {
  if (depth < 0) throw InputError("CylinderTree: depth must be >= 0");
  if (samples.empty()) throw InputError("CylinderTree: no samples");
  rank_ = samples.front().prefix1.rank();
  std::vector<std::vector<Letter>> seqs;
  seqs.reserve(samples.size());
  for (const BoundarySample& b : samples)
    seqs.push_back(interleave(b.prefix1, b.prefix2, std::min(b.t_stable, depth)));
  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return seqs[a] < seqs[b]; });
  offsets_.reserve(seqs.size() + 1);
  offsets_.push_back(0);
  for (std::size_t i : order) {
    letters_.insert(letters_.end(), seqs[i].begin(), seqs[i].end());
    offsets_.push_back(letters_.size());
  }
}

std::int64_t CylinderTree::count(const Word& p1, const Word& p2, int t) const {
  if (t < 0 || t > depth_) throw InputError("CylinderTree::count: depth outside the tree");
  if (p1.length() < static_cast<std::size_t>(t) || p2.length() < static_cast<std::size_t>(t))
    throw InputError("CylinderTree::count: prefixes shorter than t");
  const std::vector<Letter> q = interleave(p1, p2, t);
  std::size_t lo = 0, hi = static_cast<std::size_t>(total());
  // first sequence not less than q
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (compare_prefix(sequence(mid), q) < 0) lo = mid + 1; else hi = mid;
  }
  std::size_t end = lo;
  hi = static_cast<std::size_t>(total());
  while (end < hi) {
    const std::size_t mid = end + (hi - end) / 2;
    if (compare_prefix(sequence(mid), q) <= 0) end = mid + 1; else hi = mid;
  }
  return static_cast<std::int64_t>(end - lo);
}

std::vector<CylinderTree::Node> CylinderTree::nodes() const {
  std::vector<Node> out;
  std::vector<Letter> a, b;
  // Range [lo, hi) shares the first 2·t letters; recurse on the pair at t.
  auto visit = [&](auto&& self, std::size_t lo, std::size_t hi, int t) -> void {
    Node node;
    node.prefix1 = Word::reduce(a, rank_);
    node.prefix2 = Word::reduce(b, rank_);
    node.depth = t;
    node.count = static_cast<std::int64_t>(hi - lo);
    out.push_back(std::move(node));
    const std::size_t at = 2 * static_cast<std::size_t>(t);
    std::size_t i = lo;
    while (i < hi && sequence(i).size() <= at) ++i;  // terminated here
    while (i < hi) {
      const Letter x = sequence(i)[at], y = sequence(i)[at + 1];
      std::size_t j = i;
      while (j < hi && sequence(j)[at] == x && sequence(j)[at + 1] == y) ++j;
      a.push_back(x);
      b.push_back(y);
      self(self, i, j, t + 1);
      a.pop_back();
      b.pop_back();
      i = j;
    }
  };
  visit(visit, 0, static_cast<std::size_t>(total()), 0);
  return out;
}

void CylinderTree::write(std::ostream& out) const {
  for (const Node& n : nodes())
    out << to_index_list(n.prefix1) << ' ' << to_index_list(n.prefix2) << ' ' << n.count << '\n';
}

double ball_measure(const CylinderTree& tree, const BoundarySample& center, int t) {
  if (t < 0) throw InputError("ball_measure: t must be >= 0");
  if (t > center.t_stable) throw InputError("ball_measure: t exceeds the center's stable depth");
  return static_cast<double>(tree.count(center.prefix1, center.prefix2, t)) /
         static_cast<double>(tree.total());
}

namespace {

std::vector<std::size_t> choose_centers(std::size_t population, std::int64_t centers,
                                        std::uint64_t seed) {
  if (centers < 1) throw InputError("local_dimension: need at least one center");
  const std::size_t k = std::min(population, static_cast<std::size_t>(centers));
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Philox4x32 rng(seed, 0, purpose::kCenters);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

struct CenterSlopes {
  std::vector<std::optional<double>> slope;  // per chosen center
  std::int64_t dropped = 0;
};

CenterSlopes center_slopes(std::span<const BoundarySample> samples, const CylinderTree& tree,
                           std::span<const int> t_grid, const std::vector<std::size_t>& centers,
                           bool leave_one_out) {
  if (t_grid.empty()) throw InputError("local_dimension: empty radius grid");
  for (int t : t_grid)
    if (t < 1 || t > tree.depth()) throw InputError("local_dimension: radius outside the tree depth");
  const double denom = static_cast<double>(tree.total() - (leave_one_out ? 1 : 0));
  if (denom < 1.0) throw InputError("local_dimension: need at least two samples");

  CenterSlopes out;
  out.slope.resize(centers.size());
  std::vector<double> ts, ys;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const BoundarySample& s = samples[centers[c]];
    ts.clear();
    ys.clear();
    bool empty_ball = false;
    for (int t : t_grid) {
      if (t > s.t_stable) continue;
      if (empty_ball) {
        ++out.dropped;
        continue;
      }
      const std::int64_t k = tree.count(s.prefix1, s.prefix2, t) - (leave_one_out ? 1 : 0);
      if (k <= 0) {
        ++out.dropped;
        empty_ball = true;  // nested cylinders: deeper ones are empty too
        continue;
      }
      ts.push_back(t);
      ys.push_back(-std::log(static_cast<double>(k) / denom));
    }
    if (ts.size() < 2) continue;
    const double n = static_cast<double>(ts.size());
    const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sxy += (ts[i] - mt) * (ys[i] - my);
      sxx += (ts[i] - mt) * (ts[i] - mt);
    }
    if (sxx > 0.0) out.slope[c] = sxy / sxx;
  }
  return out;
}

LocalDimension summarize_slopes(const CenterSlopes& cs, const char* method,
                                std::span<const int> t_grid, std::uint64_t seed) {
  LocalDimension out;
  std::vector<double> values;
  for (const auto& s : cs.slope)
    if (s) values.push_back(*s);
  out.centers_used = static_cast<std::int64_t>(values.size());
  out.centers_skipped = static_cast<std::int64_t>(cs.slope.size()) - out.centers_used;
  out.dropped_points = cs.dropped;
  if (values.size() < 2)
    throw InputError("local_dimension: fewer than two centers have two usable radii");
  out.slope = summarize(values, method, *std::max_element(t_grid.begin(), t_grid.end()), seed);
  return out;
}

void require_same_samples(std::span<const BoundarySample> samples, const CylinderTree& tree) {
  if (static_cast<std::int64_t>(samples.size()) != tree.total())
    throw InputError("local_dimension: samples and tree sizes differ");
}

}  // namespace

LocalDimension local_dimension(std::span<const BoundarySample> samples, const CylinderTree& tree,
                               std::span<const int> t_grid, std::int64_t centers,
                               std::uint64_t seed) {
  require_same_samples(samples, tree);
  const auto idx = choose_centers(samples.size(), centers, seed);
  return summarize_slopes(center_slopes(samples, tree, t_grid, idx, true), "local_dimension",
                          t_grid, seed);
}

LocalDimension cross_local_dimension(std::span<const BoundarySample> samples,
                                     const CylinderTree& other, std::span<const int> t_grid,
                                     std::int64_t centers, std::uint64_t seed) {
  const auto idx = choose_centers(samples.size(), centers, seed);
  return summarize_slopes(center_slopes(samples, other, t_grid, idx, false),
                          "local_dimension_cross", t_grid, seed);
}

SingularityReport dimension_singularity_check(const FiniteMeasure& mu, double rho,
                                              double rho_prime, const SingularityParams& params) {
  std::vector<int> grid = params.t_grid;
  if (grid.empty())
    for (int t = 1; t <= std::max(2, params.horizon / 4); ++t) grid.push_back(t);
  const int depth = *std::max_element(grid.begin(), grid.end());

  const auto a = sample_boundary(mu, rho, params.horizon, params.samples, params.seed, params.workers);
  const auto b =
      sample_boundary(mu, rho_prime, params.horizon, params.samples, params.seed, params.workers);
  const CylinderTree tree_a(a, depth), tree_b(b, depth);
  const auto idx = choose_centers(a.size(), params.centers, params.seed);

  const CenterSlopes sa = center_slopes(a, tree_a, grid, idx, true);
  const CenterSlopes sb = center_slopes(b, tree_b, grid, idx, true);
  const CenterSlopes sx = center_slopes(a, tree_b, grid, idx, false);

  SingularityReport r;
  r.dim_a = summarize_slopes(sa, "local_dimension", grid, params.seed);
  r.dim_b = summarize_slopes(sb, "local_dimension", grid, params.seed);
  r.dim_a.slope.rho = rho;
  r.dim_b.slope.rho = rho_prime;
  r.dim_cross = summarize_slopes(sx, "local_dimension_cross", grid, params.seed);
  r.dim_cross.slope.rho = rho_prime;

  std::vector<double> diffs;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (sa.slope[i] && sb.slope[i]) diffs.push_back(*sb.slope[i] - *sa.slope[i]);
  if (diffs.size() < 2) throw InputError("dimension_singularity_check: too few paired centers");
  const EstimateResult g = summarize(diffs, "local_dimension_gap", depth, params.seed);
  r.gap = g.value;
  r.gap_std_error = g.std_error;
  r.gap_ci = {g.ci_low, g.ci_high};
  r.conclusive = g.ci_low > 0.0 || g.ci_high < 0.0;
  return r;
}

}  // namespace noisywalk
