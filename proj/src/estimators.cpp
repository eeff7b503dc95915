#include "noisywalk/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "noisywalk/errors.hpp"
#include "noisywalk/oracle.hpp"
#include "noisywalk/parallel.hpp"
#include "walker.hpp"

namespace noisywalk {

namespace {

void require_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("rho must lie in [0, 1]");
}

void require_single(const FiniteMeasure& mu, const char* what) {
  if (mu.kind() != MeasureKind::single)
    throw InputError(std::string(what) + ": expected a measure on Γ, got a pair measure");
}

EstimateResult tag(EstimateResult r, double rho, std::int64_t trials) {
  r.rho = rho;
  r.trials = trials;
  return r;
}

}  // namespace

DriftEstimate drift_mc(const FiniteMeasure& step, int n, std::int64_t trials, std::uint64_t seed,
                       unsigned workers) {
  if (n < 1) throw InputError("drift_mc: n must be >= 1");
  if (trials < 2) throw InputError("drift_mc: trials must be >= 2");
  const detail::Walker walker(step);
  struct Lengths {
    double first = 0.0, second = 0.0;
  };
  const auto per_trial = run_trials(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    Philox4x32 rng(seed, t, purpose::kWalk);
    detail::LetterStack x, y;
    for (int i = 0; i < n; ++i) walker.step(rng, x, y);
    return Lengths{static_cast<double>(x.length()) / n, static_cast<double>(y.length()) / n};
  });
  std::vector<double> a, b, c;
  a.reserve(per_trial.size());
  b.reserve(per_trial.size());
  c.reserve(per_trial.size());
  for (const auto& l : per_trial) {
    a.push_back(l.first);
    b.push_back(l.second);
    c.push_back(std::max(l.first, l.second));
  }
  DriftEstimate out{summarize(c, "drift_combined", n, seed), summarize(a, "drift_first", n, seed),
                    summarize(b, "drift_second", n, seed)};
  return out;
}

EntropyCurve entropy_exact_curve(const FiniteMeasure& step, int n_max,
                                 const ConvolutionOptions& options) {
  if (n_max < 1) throw InputError("entropy_exact_curve: n_max must be >= 1");
  const auto powers = convolve_power(step, n_max, options);
  EntropyCurve curve;
  curve.exact = true;
  curve.upper_rate = std::numeric_limits<double>::infinity();
  double previous = 0.0;
  for (int k = 1; k <= n_max; ++k) {
    const FiniteMeasure& m = powers[static_cast<std::size_t>(k - 1)];
    const Truncation& tr = m.truncation();
    const double h = tr.lost_mass > 0.0 ? 0.5 * (tr.entropy_low + tr.entropy_high)
                                        : shannon_entropy(m);
    curve.values.push_back(h);
    curve.truncation.push_back(tr);
    curve.increments.push_back(h - previous);
    curve.exact = curve.exact && m.is_exact();
    if (!tr.truncated) curve.upper_rate = std::min(curve.upper_rate, h / k);
    previous = h;
  }
  return curve;
}

RateBracket entropy_rate_estimate(const EntropyCurve& curve) {
  RateBracket r;
  r.h_upper = std::numeric_limits<double>::infinity();
  int last = 0;
  for (int k = 1; k <= static_cast<int>(curve.values.size()); ++k) {
    if (curve.truncated(k)) continue;
    r.h_upper = std::min(r.h_upper, curve.values[static_cast<std::size_t>(k - 1)] / k);
    // H_0 = 0 is exact, so level 1 pairs with it.
    if (k == 1 || !curve.truncated(k - 1)) last = k;
  }
  if (last < 2) throw InputError("entropy_rate_estimate: need two consecutive untruncated levels");
  r.h_increment = curve.increments[static_cast<std::size_t>(last - 1)];
  r.n_used = last;
  return r;
}

std::optional<int> semigroup_alphabet(const FiniteMeasure& mu) {
  if (mu.kind() != MeasureKind::single || mu.size() < 2) return std::nullopt;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Word& w = mu.first(i);
    if (w.length() != 1 || w[0] < 0) return std::nullopt;
  }
  if (mu.is_exact()) {
    const Rational u(1, static_cast<long long>(mu.size()));
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu.exact_weight(i) != u) return std::nullopt;
  } else {
    const double u = 1.0 / static_cast<double>(mu.size());
    for (double w : mu.weights())
      if (std::abs(w - u) > 1e-12) return std::nullopt;
  }
  return static_cast<int>(mu.size());
}

EstimateResult shannon_pointwise(const FiniteMeasure& mu, double rho, int n, std::int64_t trials,
                                 std::uint64_t seed, unsigned workers) {
  require_single(mu, "shannon_pointwise");
  require_rho(rho);
  const auto m = semigroup_alphabet(mu);
  if (!m)
    throw UnsupportedRegimeError(
        "shannon_pointwise: needs μ uniform on free semigroup generators; use the exact "
        "entropy curve for other measures");
  if (n < 1) throw InputError("shannon_pointwise: n must be >= 1");
  if (trials < 2) throw InputError("shannon_pointwise: trials must be >= 2");

  const FiniteMeasure pi = build_pi_rho(mu, rho);
  const AtomSampler sampler(pi);
  std::vector<bool> diagonal(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) diagonal[i] = pi.first(i) == pi.second(i);

  const double md = *m;
  const double log_m = std::log(md);
  // −log p with p the diagonal mass, for ρ = 0 where every step matches.
  const double neg_log_p = log_m - std::log1p(-(md - 1.0) * rho / md);
  // −log q and log(p/q) for ρ > 0.
  const double neg_log_q = 2.0 * log_m - std::log(rho);
  const double log_ratio = rho > 0.0 ? std::log1p(md * (1.0 - rho) / rho) : 0.0;

  const auto samples = run_trials(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    Philox4x32 rng(seed, t, purpose::kWalk);
    std::int64_t matches = 0;
    for (int i = 0; i < n; ++i) matches += diagonal[sampler.draw(rng)];
    if (rho == 0.0) return neg_log_p;
    return neg_log_q - (static_cast<double>(matches) / n) * log_ratio;
  });
  return tag(summarize(samples, "shannon_pointwise", n, seed), rho, trials);
}

EstimateResult shannon_pointwise(int m, double rho, int n, std::int64_t trials, std::uint64_t seed,
                                 unsigned workers) {
  return shannon_pointwise(free_semigroup_uniform(m), rho, n, trials, seed, workers);
}

namespace {

// Σ min(π_n(u,v), μ_n(u)μ_n(v)) over supp π_n, exactly.
Rational overlap_exact(const FiniteMeasure& mu_n, const FiniteMeasure& pi_n) {
  const ExactMasses& me = mu_n.exact();
  const ExactMasses& pe = pi_n.exact();
  std::vector<std::int64_t> slot(mu_n.table()->size(), -1);
  for (std::size_t i = 0; i < mu_n.size(); ++i) slot[mu_n.keys()[i].first] = static_cast<std::int64_t>(i);

  const BigInt dm2 = me.denominator() * me.denominator();
  const BigInt& dp = pe.denominator();
  // Fast path: every cross product below 2^128.
  const bool narrow = me.fits_u64() && pe.fits_u64() && me.denominator() <= UINT64_MAX &&
                      dp <= UINT64_MAX && msb(dm2) + msb(dp) + 2 <= 128;
  if (narrow) {
    __extension__ using U128 = unsigned __int128;
    const std::uint64_t dm = me.denominator().convert_to<std::uint64_t>();
    const U128 dm2_w = static_cast<U128>(dm) * dm;
    const U128 dp_w = dp.convert_to<std::uint64_t>();
    U128 pi_side = 0, mu_side = 0;  // over dp and dm2 respectively
    const auto mn = me.narrow();
    const auto pn = pe.narrow();
    for (std::size_t i = 0; i < pi_n.size(); ++i) {
      const auto [u, v] = pi_n.keys()[i];
      const std::int64_t a = slot[u], b = slot[v];
      if (a < 0 || b < 0) continue;  // μ_n(u)μ_n(v) = 0
      const U128 p = pn[i];
      const U128 prod = static_cast<U128>(mn[static_cast<std::size_t>(a)]) * mn[static_cast<std::size_t>(b)];
      // Compare p/dp with prod/dm2 through p·dm2 vs prod·dp.
      if (p * dm2_w <= prod * dp_w)
        pi_side += p;
      else
        mu_side += prod;
    }
    auto to_big = [](U128 x) {
      BigInt r = static_cast<std::uint64_t>(x >> 64);
      r <<= 64;
      r += static_cast<std::uint64_t>(x);
      return r;
    };
    return Rational(to_big(pi_side), dp) + Rational(to_big(mu_side), dm2);
  }
  BigInt pi_side = 0, mu_side = 0;
  for (std::size_t i = 0; i < pi_n.size(); ++i) {
    const auto [u, v] = pi_n.keys()[i];
    const std::int64_t a = slot[u], b = slot[v];
    if (a < 0 || b < 0) continue;
    const BigInt p = pe.numerator(i);
    const BigInt prod =
        me.numerator(static_cast<std::size_t>(a)) * me.numerator(static_cast<std::size_t>(b));
    if (p * dm2 <= prod * dp)
      pi_side += p;
    else
      mu_side += prod;
  }
  return Rational(pi_side, dp) + Rational(mu_side, dm2);
}

double overlap_float(const FiniteMeasure& mu_n, const FiniteMeasure& pi_n) {
  std::vector<double> mass(mu_n.table()->size(), 0.0);
  for (std::size_t i = 0; i < mu_n.size(); ++i) mass[mu_n.keys()[i].first] = mu_n.weight(i);
  CompensatedSum sum;
  for (std::size_t i = 0; i < pi_n.size(); ++i) {
    const auto [u, v] = pi_n.keys()[i];
    sum.add(std::min(pi_n.weight(i), mass[u] * mass[v]));
  }
  return sum.value();
}

// Steps on single positive letters multiply without cancellation, so π_n
// and μ_n×μ_n are product measures over the n positions.  One-step pairs
// are grouped by their two masses; the overlap is then a sum over the
// compositions of n into those classes.  nullopt when μ has another shape
// or the compositions outnumber `budget`.
std::optional<Rational> overlap_letters(const FiniteMeasure& mu, const FiniteMeasure& pi, int n,
                                        std::size_t budget) {
  if (!mu.is_exact() || !mu.is_positive()) return std::nullopt;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.first(i).length() != 1) return std::nullopt;

  std::map<std::pair<Rational, Rational>, std::int64_t> classes;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const Rational q = mu.exact_weight(*mu.find(pi.first(i))) * mu.exact_weight(*mu.find(pi.second(i)));
    ++classes[{pi.exact_weight(i), q}];
  }
  const std::size_t c = classes.size();
  // C(n + c − 1, c − 1) compositions
  double count = 1.0;
  for (std::size_t j = 1; j < c; ++j) count = count * static_cast<double>(n + j) / static_cast<double>(j);
  if (count > static_cast<double>(budget)) return std::nullopt;

  const std::size_t len = static_cast<std::size_t>(n) + 1;
  std::vector<std::vector<Rational>> p_pow(c), q_pow(c);
  std::vector<std::vector<BigInt>> n_pow(c);
  std::size_t k = 0;
  for (const auto& [masses, size] : classes) {
    p_pow[k].assign(len, Rational(1));
    q_pow[k].assign(len, Rational(1));
    n_pow[k].assign(len, BigInt(1));
    for (std::size_t j = 1; j < len; ++j) {
      p_pow[k][j] = p_pow[k][j - 1] * masses.first;
      q_pow[k][j] = q_pow[k][j - 1] * masses.second;
      n_pow[k][j] = n_pow[k][j - 1] * size;
    }
    ++k;
  }
  std::vector<BigInt> factorial(len, BigInt(1));
  for (std::size_t j = 1; j < len; ++j) factorial[j] = factorial[j - 1] * j;

  Rational total = 0;
  std::vector<int> parts(c, 0);
  auto visit = [&](auto&& self, std::size_t cls, int left) -> void {
    if (cls + 1 == c) {
      parts[cls] = left;
      BigInt ways = factorial[static_cast<std::size_t>(n)];
      Rational p = 1, q = 1;
      for (std::size_t j = 0; j < c; ++j) {
        const auto e = static_cast<std::size_t>(parts[j]);
        ways = ways / factorial[e] * n_pow[j][e];
        p *= p_pow[j][e];
        q *= q_pow[j][e];
      }
      total += Rational(ways) * (p < q ? p : q);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      parts[cls] = e;
      self(self, cls + 1, left - e);
    }
  };
  visit(visit, 0, n);
  return total;
}

}  // namespace

double tv_exact(const FiniteMeasure& mu, double rho, int n, std::size_t cap) {
  require_single(mu, "tv_exact");
  require_rho(rho);
  if (n < 1) throw InputError("tv_exact: n must be >= 1");
  if (const auto overlap = overlap_letters(mu, build_pi_rho(mu, rho), n, cap))
    return Rational(Rational(1) - *overlap).convert_to<double>();
  return tv_exact_convolution(mu, rho, n, cap);
}

double tv_exact_convolution(const FiniteMeasure& mu, double rho, int n, std::size_t cap) {
  require_single(mu, "tv_exact");
  require_rho(rho);
  if (n < 1) throw InputError("tv_exact: n must be >= 1");
  const FiniteMeasure pi = build_pi_rho(mu, rho);
  ConvolutionOptions options;
  options.cap = cap;
  options.on_overflow = OverflowPolicy::error;
  options.arithmetic = mu.is_exact() ? Arithmetic::exact : Arithmetic::floating;
  const FiniteMeasure* steps[] = {&mu, &pi};
  const auto powers = convolve_powers_shared(steps, n, options);
  const FiniteMeasure& mu_n = powers[0].back();
  const FiniteMeasure& pi_n = powers[1].back();
  if (mu.is_exact()) {
    const Rational tv = Rational(1) - overlap_exact(mu_n, pi_n);
    return tv.convert_to<double>();
  }
  return std::clamp(1.0 - overlap_float(mu_n, pi_n), 0.0, 1.0);
}

TvLowerBound tv_lower_bound_mc(const FiniteMeasure& mu, double rho, int n, double c,
                               std::int64_t trials, std::uint64_t seed, unsigned workers) {
  require_single(mu, "tv_lower_bound_mc");
  require_rho(rho);
  if (n < 1) throw InputError("tv_lower_bound_mc: n must be >= 1");
  if (!(c > 0.0 && c < 1.0)) throw InputError("tv_lower_bound_mc: c must lie in (0, 1)");
  if (trials < 2) throw InputError("tv_lower_bound_mc: trials must be >= 2");

  TvLowerBound out;
  out.threshold = static_cast<int>(std::ceil(c * n));
  const auto threshold = static_cast<std::size_t>(out.threshold);

  const detail::Walker coupled(build_pi_rho(mu, rho));
  const detail::Walker single(mu);
  const auto hits = run_trials(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    std::pair<bool, bool> r;
    {
      Philox4x32 rng(seed, t, purpose::kWalk);
      detail::LetterStack x, y;
      for (int i = 0; i < n; ++i) coupled.step(rng, x, y);
      r.first = detail::common_prefix(x.letters, y.letters) >= threshold;
    }
    {
      // Two independent μ-walks; the second coordinate of `y` is unused.
      Philox4x32 rng(seed, t, purpose::kReference);
      detail::LetterStack x, y, unused;
      for (int i = 0; i < n; ++i) single.step(rng, x, unused);
      for (int i = 0; i < n; ++i) single.step(rng, y, unused);
      r.second = detail::common_prefix(x.letters, y.letters) >= threshold;
    }
    return r;
  });
  std::int64_t s1 = 0, s2 = 0;
  for (const auto& [a, b] : hits) {
    s1 += a;
    s2 += b;
  }
  const double tn = static_cast<double>(trials);
  out.p_coupled = s1 / tn;
  out.p_independent = s2 / tn;
  const double d = out.p_coupled - out.p_independent;
  Interval ci = newcombe_difference(s1, trials, s2, trials);
  if (d < 0.0) ci = {-ci.high, -ci.low};

  EstimateResult& r = out.bound;
  r.value = std::abs(d);
  r.std_error = std::sqrt(out.p_coupled * (1.0 - out.p_coupled) / tn +
                          out.p_independent * (1.0 - out.p_independent) / tn);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.n = n;
  r.trials = trials;
  r.seed = seed;
  r.method = "tv_lower_bound_mc";
  r.rho = rho;
  return out;
}

std::vector<double> parse_rho_grid(std::string_view spec) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = spec.find(':', start);
    const std::string_view piece = spec.substr(start, colon == std::string_view::npos ? spec.npos : colon - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (ec != std::errc{} || ptr != piece.data() + piece.size() || piece.empty())
      throw InputError("rho grid must look like a:b:step, got '" + std::string(spec) + "'");
    parts.push_back(v);
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw InputError("rho grid must look like a:b:step");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0) || a > b) throw InputError("rho grid needs a <= b and step > 0");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    // Round to 12 decimals so 0.1*3 lands on 0.3.
    const double v = std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12;
    grid.push_back(std::min(v, b));
  }
  for (double r : grid) require_rho(r);
  return grid;
}

SweepTable rho_sweep(const FiniteMeasure& mu, std::span<const double> grid,
                     const SweepParams& params) {
  require_single(mu, "rho_sweep");
  if (grid.empty()) throw InputError("rho_sweep: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require_rho(grid[i]);
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw InputError("rho_sweep: grid must be strictly increasing");
  }
  const auto alphabet = semigroup_alphabet(mu);
  SweepTable table;
  for (double rho : grid) {
    SweepRow row;
    row.rho = rho;
    const FiniteMeasure pi = build_pi_rho(mu, rho);
    if (alphabet) {
      row.entropy = shannon_pointwise(mu, rho, params.entropy_n, params.entropy_trials,
                                      params.seed, params.workers);
      row.entropy_closed_form = h_semigroup({*alphabet, rho});
    } else {
      ConvolutionOptions options;
      options.cap = params.cap;
      const auto curve = entropy_exact_curve(pi, params.entropy_n_max, options);
      const RateBracket b = entropy_rate_estimate(curve);
      EstimateResult& e = row.entropy;
      e.value = b.h_increment;
      e.ci_low = b.h_increment;
      e.ci_high = b.h_upper;
      e.std_error = 0.5 * (b.h_upper - b.h_increment);
      e.n = b.n_used;
      e.trials = 1;
      e.seed = params.seed;
      e.method = "entropy_increment";
      e.rho = rho;
    }
    row.drift = tag(drift_mc(pi, params.drift_n, params.drift_trials, params.seed, params.workers)
                        .combined,
                    rho, params.drift_trials);
    for (int n : params.tv_n) row.tv.emplace_back(n, tv_exact(mu, rho, n, params.cap));
    table.rows.push_back(std::move(row));
  }
  return table;
}

double default_rho_star_margin(const SweepTable& table) {
  if (table.rows.empty() || table.rows.back().rho != 1.0)
    throw InputError("rho_star: the sweep needs a row at rho = 1");
  return 3.0 * table.rows.back().entropy.std_error;
}

RhoStar rho_star_estimate(const SweepTable& table, std::optional<double> margin) {
  RhoStar out;
  out.margin = margin.value_or(default_rho_star_margin(table));
  if (table.rows.empty() || table.rows.back().rho != 1.0)
    throw InputError("rho_star: the sweep needs a row at rho = 1");
  if (out.margin < 0.0) throw InputError("rho_star: margin must be non-negative");
  const double h1 = table.rows.back().entropy.value;
  bool found = false;
  for (const SweepRow& row : table.rows) {
    if (row.rho >= 1.0 || !(row.entropy.value < h1 - out.margin)) break;
    out.rho_star = row.rho;
    found = true;
  }
  if (!found) {
    out.rho_star = table.rows.front().rho;
    out.warning = true;
    out.message = "no grid point separates from h(pi^1) by the margin; returning the smallest rho";
  }
  return out;
}

}  // namespace noisywalk
