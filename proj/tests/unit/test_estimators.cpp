#include <doctest.h>

#include <cmath>
#include <vector>

#include "noisywalk/errors.hpp"
#include "noisywalk/estimators.hpp"
#include "noisywalk/oracle.hpp"

using namespace noisywalk;

namespace {

bool ordered(const EstimateResult& r) {
  return r.ci_low <= r.value && r.value <= r.ci_high && r.std_error >= 0.0 && r.trials >= 1;
}

bool overlap(const EstimateResult& a, const EstimateResult& b) {
  return a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
}

}  // namespace

TEST_CASE("semigroup drift is exactly one") {
  const FiniteMeasure pi = build_pi_rho(free_semigroup_uniform(3), 0.4);
  const DriftEstimate d = drift_mc(pi, 50, 20, 1);
  CHECK(d.combined.value == 1.0);
  CHECK(d.combined.std_error == 0.0);
  CHECK(d.first.value == 1.0);
  CHECK(d.second.value == 1.0);
}

TEST_CASE("free group drift contains (k-1)/k") {
  for (int k : {2, 3}) {
    const DriftEstimate d = drift_mc(free_group_srw(k), 2000, 400, 7);
    CHECK(ordered(d.combined));
    CHECK(d.combined.ci_low <= drift_free_group_srw(k) + 2e-3);
    CHECK(d.combined.ci_high >= drift_free_group_srw(k) - 2e-3);
    CHECK(d.second.value == 0.0);
  }
  CHECK_THROWS_AS(drift_mc(free_group_srw(2), 0, 10, 1), InputError);
  CHECK_THROWS_AS(drift_mc(free_group_srw(2), 10, 1, 1), InputError);
}

TEST_CASE("coordinate drifts agree across rho") {
  for (double rho : {0.0, 0.5, 1.0}) {
    const DriftEstimate d = drift_mc(build_pi_rho(free_group_srw(2), rho), 1000, 300, 3);
    CHECK(overlap(d.first, d.second));
  }
}

TEST_CASE("drift is independent of worker count") {
  const FiniteMeasure pi = build_pi_rho(free_group_srw(2), 0.3);
  const DriftEstimate a = drift_mc(pi, 200, 101, 9, 1);
  const DriftEstimate b = drift_mc(pi, 200, 101, 9, 8);
  CHECK(a.combined.value == b.combined.value);
  CHECK(a.combined.std_error == b.combined.std_error);
}

TEST_CASE("entropy curve, semigroup: H(pi_n) = n h") {
  const FiniteMeasure pi = build_pi_rho(free_semigroup_uniform(2), 0.5);
  const EntropyCurve c = entropy_exact_curve(pi, 6);
  CHECK(c.exact);
  for (int n = 1; n <= 6; ++n)
    CHECK(c.values[static_cast<std::size_t>(n - 1)] ==
          doctest::Approx(n * h_semigroup({2, 0.5})).epsilon(1e-13));
  const RateBracket r = entropy_rate_estimate(c);
  CHECK(r.h_upper == doctest::Approx(h_semigroup({2, 0.5})).epsilon(1e-13));
  CHECK(r.h_increment == doctest::Approx(h_semigroup({2, 0.5})).epsilon(1e-12));
}

TEST_CASE("entropy curve endpoints") {
  const FiniteMeasure mu = free_group_srw(2);
  const EntropyCurve single = entropy_exact_curve(mu, 4);
  const EntropyCurve zero = entropy_exact_curve(build_pi_rho(mu, 0.0), 4);
  const EntropyCurve one = entropy_exact_curve(build_pi_rho(mu, 1.0), 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(zero.values[i] == doctest::Approx(single.values[i]).epsilon(1e-14));
    CHECK(one.values[i] == doctest::Approx(2 * single.values[i]).epsilon(1e-14));
  }
}

TEST_CASE("rate bracket on F_2") {
  const EntropyCurve c = entropy_exact_curve(free_group_srw(2), 6);
  const RateBracket r = entropy_rate_estimate(c);
  CHECK(r.h_increment <= r.h_upper);
  CHECK(r.n_used == 6);
  // increments never grow along a random walk
  for (std::size_t i = 1; i < c.increments.size(); ++i) CHECK(c.increments[i] <= c.increments[i - 1] + 1e-12);
  CHECK(r.h_increment > 0.0);
}

TEST_CASE("rate bracket on a linear curve and degenerate inputs") {
  EntropyCurve c;
  for (int n = 1; n <= 5; ++n) {
    c.values.push_back(0.7 * n);
    c.increments.push_back(0.7);
    c.truncation.push_back({});
  }
  const RateBracket r = entropy_rate_estimate(c);
  CHECK(r.h_upper == doctest::Approx(0.7));
  CHECK(r.h_increment == doctest::Approx(0.7));
  for (auto& t : c.truncation) t.truncated = true;
  CHECK_THROWS_AS(entropy_rate_estimate(c), InputError);
}

TEST_CASE("shannon pointwise endpoints are exact") {
  for (int m : {2, 3}) {
    const EstimateResult r0 = shannon_pointwise(m, 0.0, 500, 20, 4);
    CHECK(r0.value == std::log(static_cast<double>(m)));
    CHECK(r0.std_error == 0.0);
    const EstimateResult r1 = shannon_pointwise(m, 1.0, 500, 20, 4);
    CHECK(r1.value == 2.0 * std::log(static_cast<double>(m)));
    CHECK(r1.std_error == 0.0);
  }
}

TEST_CASE("shannon pointwise at rho = 0.5 and regime check") {
  const EstimateResult r = shannon_pointwise(2, 0.5, 2000, 100, 11);
  CHECK(ordered(r));
  CHECK(std::abs(r.value - h_semigroup({2, 0.5})) < 0.01 * h_semigroup({2, 0.5}));
  CHECK_THROWS_AS(shannon_pointwise(free_group_srw(2), 0.5, 10, 10, 1), UnsupportedRegimeError);
  std::vector<std::pair<Word, Rational>> s{{Word::generator(1, 2), Rational(1, 3)},
                                           {Word::generator(2, 2), Rational(2, 3)}};
  CHECK_THROWS_AS(shannon_pointwise(FiniteMeasure::build(2, s), 0.5, 10, 10, 1),
                  UnsupportedRegimeError);
}

TEST_CASE("tv_exact examples") {
  const FiniteMeasure srw = free_group_srw(2);
  CHECK(tv_exact(srw, 0.0, 1) == 0.75);
  for (int n = 1; n <= 4; ++n) CHECK(tv_exact(srw, 1.0, n) == 0.0);
  for (int n = 1; n <= 10; ++n)
    CHECK(std::abs(tv_exact(free_semigroup_uniform(2), 0.3, n) - tv_semigroup({2, 0.3}, n)) < 1e-12);
  CHECK_THROWS_AS(tv_exact(srw, 0.5, 6, 1000), TruncationError);
}

TEST_CASE("letter steps: class sum agrees with explicit convolution") {
  for (int n = 1; n <= 10; ++n)
    REQUIRE(std::abs(tv_exact_convolution(free_semigroup_uniform(2), 0.3, n) -
                     tv_semigroup({2, 0.3}, n)) < 1e-12);
  const FiniteMeasure sg3 = free_semigroup_uniform(3);
  for (int i = 0; i <= 10; ++i)
    for (int n = 1; n <= 5; ++n)
      REQUIRE(tv_exact(sg3, i / 10.0, n) == tv_exact_convolution(sg3, i / 10.0, n));
  // unequal weights have no closed form
  std::vector<std::pair<Word, Rational>> s{{Word::generator(1, 3), Rational(1, 2)},
                                           {Word::generator(2, 3), Rational(1, 3)},
                                           {Word::generator(3, 3), Rational(1, 6)}};
  const FiniteMeasure skew = FiniteMeasure::build(3, s);
  for (double rho : {0.0, 0.25, 0.7, 1.0})
    for (int n = 1; n <= 5; ++n) REQUIRE(tv_exact(skew, rho, n) == tv_exact_convolution(skew, rho, n));
  CHECK(tv_exact(sg3, 1.0, 10) == 0.0);
  CHECK_THROWS_AS(tv_exact_convolution(sg3, 0.5, 10, 1000), TruncationError);
}

TEST_CASE("property: tv_exact is non-increasing in rho on the semigroup") {
  for (int n : {2, 6}) {
    double prev = 2.0;
    for (int i = 0; i <= 10; ++i) {
      const double tv = tv_exact(free_semigroup_uniform(2), i / 10.0, n);
      REQUIRE(tv >= 0.0);
      REQUIRE(tv <= 1.0);
      REQUIRE(tv <= prev);
      prev = tv;
    }
  }
}

TEST_CASE("tv_exact with float weights") {
  std::vector<std::pair<Word, double>> s{{Word::generator(1, 2), 0.5}, {Word::generator(2, 2), 0.5}};
  const FiniteMeasure mu = FiniteMeasure::build(2, s);
  CHECK(tv_exact(mu, 0.3, 5) == doctest::Approx(tv_semigroup({2, 0.3}, 5)).epsilon(1e-12));
}

TEST_CASE("tv lower bound") {
  const FiniteMeasure srw = free_group_srw(2);
  const TvLowerBound one = tv_lower_bound_mc(srw, 1.0, 20, 0.1, 4000, 5);
  CHECK(one.bound.ci_low <= 0.0);
  CHECK(one.bound.value < 0.05);
  // equal coordinates of length n: the event holds surely in the semigroup
  const TvLowerBound zero = tv_lower_bound_mc(free_semigroup_uniform(2), 0.0, 20, 0.5, 2000, 5);
  CHECK(zero.p_coupled == 1.0);
  CHECK(zero.bound.value == doctest::Approx(1.0 - zero.p_independent));
  CHECK(zero.threshold == 10);
  CHECK_THROWS_AS(tv_lower_bound_mc(srw, 0.5, 10, 0.0, 10, 1), InputError);
  CHECK_THROWS_AS(tv_lower_bound_mc(srw, 0.5, 10, 1.0, 10, 1), InputError);
}

TEST_CASE("tv lower bound stays below the exact distance") {
  const FiniteMeasure srw = free_group_srw(2);
  for (double rho : {0.1, 0.5, 0.9})
    for (int n : {2, 4, 6}) {
      const TvLowerBound lb = tv_lower_bound_mc(srw, rho, n, 0.2, 4000, 17);
      CHECK(lb.bound.value <= tv_exact(srw, rho, n) + 3 * lb.bound.std_error);
    }
}

TEST_CASE("rho grid parsing") {
  const auto g = parse_rho_grid("0:1:0.05");
  REQUIRE(g.size() == 21);
  CHECK(g.front() == 0.0);
  CHECK(g[3] == 0.15);
  CHECK(g.back() == 1.0);
  CHECK(parse_rho_grid("0.2:0.2:0.1").size() == 1);
  CHECK_THROWS_AS(parse_rho_grid("0:1"), InputError);
  CHECK_THROWS_AS(parse_rho_grid("0:1.5:0.5"), InputError);
  CHECK_THROWS_AS(parse_rho_grid("1:0:0.1"), InputError);
  CHECK_THROWS_AS(parse_rho_grid("0:1:0"), InputError);
}

TEST_CASE("sweep and rho_star on the semigroup") {
  SweepParams p;
  p.seed = 21;
  p.entropy_n = 1000;
  p.entropy_trials = 50;
  p.drift_n = 20;
  p.drift_trials = 10;
  p.tv_n = {3};
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const SweepTable t = rho_sweep(free_semigroup_uniform(2), grid, p);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows.front().entropy.value == std::log(2.0));
  CHECK(t.rows.back().entropy.value == 2 * std::log(2.0));
  for (const SweepRow& r : t.rows) {
    CHECK(r.drift.value == 1.0);
    REQUIRE(r.entropy_closed_form);
    CHECK(std::abs(r.entropy.value - *r.entropy_closed_form) <= 3 * r.entropy.std_error + 1e-12);
    CHECK(r.tv.at(0).second == doctest::Approx(tv_semigroup({2, r.rho}, 3)).epsilon(1e-12));
  }
  const RhoStar s = rho_star_estimate(t, 0.01);
  CHECK(s.rho_star == 0.75);
  CHECK_FALSE(s.warning);
  const RhoStar wide = rho_star_estimate(t, 1.0);
  CHECK(wide.rho_star == 0.0);
  CHECK(wide.warning);

  const std::vector<double> bad{0.5, 0.25};
  CHECK_THROWS_AS(rho_sweep(free_semigroup_uniform(2), bad, p), InputError);
}

TEST_CASE("rho_star on a flat table warns") {
  SweepTable t;
  for (double rho : {0.0, 0.5, 1.0}) {
    SweepRow r;
    r.rho = rho;
    r.entropy.value = 1.0;
    r.entropy.std_error = 0.01;
    t.rows.push_back(r);
  }
  const RhoStar s = rho_star_estimate(t);
  CHECK(s.margin == doctest::Approx(0.03));
  CHECK(s.rho_star == 0.0);
  CHECK(s.warning);
  t.rows.pop_back();
  CHECK_THROWS_AS(rho_star_estimate(t), InputError);
}

TEST_CASE("sweep on the free group uses the exact curve") {
  SweepParams p;
  p.seed = 2;
  p.entropy_n_max = 4;
  p.drift_n = 50;
  p.drift_trials = 20;
  const std::vector<double> grid{0.0, 1.0};
  const SweepTable t = rho_sweep(free_group_srw(2), grid, p);
  CHECK(t.rows[0].entropy.method == "entropy_increment");
  CHECK_FALSE(t.rows[0].entropy_closed_form);
  CHECK(t.rows[1].entropy.value == doctest::Approx(2 * t.rows[0].entropy.value).epsilon(1e-12));
}
