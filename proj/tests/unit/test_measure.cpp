#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "noisywalk/errors.hpp"
#include "noisywalk/measure.hpp"

using namespace noisywalk;

namespace {

Word w(std::initializer_list<int> idx, int rank = 2) {
  const std::vector<int> v(idx);
  return from_indices(v, rank);
}

}  // namespace

TEST_CASE("parse_rational") {
  CHECK(parse_rational("3/8") == Rational(3, 8));
  CHECK(parse_rational("0.375") == Rational(3, 8));
  CHECK(parse_rational("1e-3") == Rational(1, 1000));
  CHECK(parse_rational(" 2.5E+1 ") == Rational(25));
  CHECK(parse_rational("-0.5") == Rational(-1, 2));
  CHECK_THROWS_AS(parse_rational("1/0"), InputError);
  CHECK_THROWS_AS(parse_rational("abc"), InputError);
  CHECK_THROWS_AS(parse_rational(""), InputError);
  CHECK(decimal_rational(0.1) == Rational(1, 10));
  CHECK(parse_rational("0.08") == Rational(2, 25));
  CHECK(parse_rational("010") == Rational(10));
  CHECK(parse_rational("0/7") == Rational(0));
}

TEST_CASE("build validates weights") {
  std::vector<std::pair<Word, double>> neg{{w({1}), 1.5}, {w({2}), -0.5}};
  CHECK_THROWS_AS(FiniteMeasure::build(2, neg), InputError);
  std::vector<std::pair<Word, double>> off{{w({1}), 0.5}, {w({2}), 0.4}};
  CHECK_THROWS_AS(FiniteMeasure::build(2, off), ValidationError);
  std::vector<std::pair<Word, double>> empty;
  CHECK_THROWS_AS(FiniteMeasure::build(2, empty), ValidationError);
  std::vector<std::pair<Word, Rational>> exact_off{{w({1}), Rational(1, 3)}, {w({2}), Rational(1, 3)}};
  CHECK_THROWS_AS(FiniteMeasure::build(2, exact_off), ValidationError);
}

TEST_CASE("build merges duplicates, drops zeros and sorts") {
  std::vector<std::pair<Word, double>> s{
      {w({2}), 0.25}, {w({1}), 0.25}, {w({2}), 0.5}, {w({-1}), 0.0}};
  const FiniteMeasure m = FiniteMeasure::build(2, s);
  REQUIRE(m.size() == 2);
  CHECK(m.first(0) == w({1}));
  CHECK(m.weight(1) == 0.75);
  CHECK(m.mass(w({-1})) == 0.0);
  CHECK_FALSE(m.is_exact());
}

TEST_CASE("standard measures") {
  const FiniteMeasure srw = free_group_srw(2);
  CHECK(srw.size() == 4);
  CHECK(srw.is_exact());
  CHECK(srw.exact_weight(0) == Rational(1, 4));
  CHECK_FALSE(srw.is_positive());
  CHECK(shannon_entropy(srw) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  const FiniteMeasure sg = free_semigroup_uniform(3);
  CHECK(sg.is_positive());
  CHECK(first_moment(sg) == 1.0);
}

TEST_CASE("first moment examples") {
  std::vector<std::pair<Word, Rational>> point{{Word(2), Rational(1)}};
  CHECK(first_moment(FiniteMeasure::build(2, point)) == 0.0);
  for (double rho : {0.0, 0.3, 1.0}) CHECK(first_moment(build_pi_rho(free_group_srw(2), rho)) == 1.0);
}

TEST_CASE("pi_rho structure") {
  const FiniteMeasure mu = free_group_srw(2);
  const FiniteMeasure p0 = build_pi_rho(mu, 0.0);
  CHECK(p0.size() == 4);
  for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p0.first(i) == p0.second(i));
  const FiniteMeasure p1 = build_pi_rho(mu, 1.0);
  CHECK(p1.size() == 16);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1.exact_weight(i) == Rational(1, 16));
  const FiniteMeasure ph = build_pi_rho(mu, 0.5);
  CHECK(ph.exact_weight(*ph.find(WordPair{w({1}), w({1})})) == Rational(1, 8) + Rational(1, 32));
  CHECK(ph.exact_weight(*ph.find(WordPair{w({1}), w({2})})) == Rational(1, 32));
  CHECK_THROWS_AS(build_pi_rho(mu, 1.5), InputError);
  CHECK_THROWS_AS(build_pi_rho(mu, -0.1), InputError);
  CHECK_THROWS_AS(build_pi_rho(ph, 0.5), InputError);
}

TEST_CASE("property: marginal identity holds exactly on a rho grid") {
  std::vector<std::pair<Word, Rational>> s{
      {w({1}), Rational(1, 2)}, {w({-2}), Rational(1, 3)}, {w({1, 2}), Rational(1, 6)}};
  const FiniteMeasure mu = FiniteMeasure::build(2, s);
  for (int i = 0; i <= 20; ++i) {
    const double rho = i / 20.0;
    const FiniteMeasure pi = build_pi_rho(mu, rho);
    for (int c : {0, 1}) {
      const FiniteMeasure m = marginal(pi, c);
      REQUIRE(m.size() == mu.size());
      for (std::size_t j = 0; j < mu.size(); ++j) {
        REQUIRE(m.first(j) == mu.first(j));
        REQUIRE(m.exact_weight(j) == mu.exact_weight(j));
      }
    }
  }
}

TEST_CASE("property: marginal identity within 1e-14 for float weights") {
  std::vector<std::pair<Word, double>> s{{w({1}), 0.1}, {w({-2}), 0.2}, {w({2, 2}), 0.7}};
  const FiniteMeasure mu = FiniteMeasure::build(2, s);
  CHECK_FALSE(build_pi_rho(FiniteMeasure::build(2, s), 0.5).is_exact());
  for (int i = 0; i <= 10; ++i) {
    const FiniteMeasure m = marginal(build_pi_rho(mu, i / 10.0), 1);
    for (std::size_t j = 0; j < mu.size(); ++j) REQUIRE(std::abs(m.weight(j) - mu.weight(j)) < 1e-14);
  }
}

TEST_CASE("entropy gaps at the endpoints are exact zeros") {
  const FiniteMeasure mu = free_group_srw(2);
  const auto g0 = entropy_gaps(mu, build_pi_rho(mu, 0.0));
  CHECK(g0.lower_exact_zero);
  CHECK(g0.lower_certified());
  CHECK(g0.upper_certified());
  const auto g1 = entropy_gaps(mu, build_pi_rho(mu, 1.0));
  CHECK(g1.upper_exact_zero);
  CHECK(g1.lower_gap == doctest::Approx(std::log(4.0)));
  const auto gh = entropy_gaps(mu, build_pi_rho(mu, 0.5));
  CHECK(gh.lower_gap > 0.0);
  CHECK(gh.upper_gap > 0.0);
  CHECK(gh.lower_gap == doctest::Approx(gh.entropy_pair - gh.entropy_single));
}

TEST_CASE("sampler frequencies follow the weights") {
  std::vector<std::pair<Word, Rational>> s{{w({1}), Rational(1, 8)}, {w({2}), Rational(7, 8)}};
  const FiniteMeasure mu = FiniteMeasure::build(2, s);
  const AtomSampler sampler(mu);
  Philox4x32 rng(3, 0);
  int hits = 0;
  const int n = 80000;
  for (int i = 0; i < n; ++i) hits += sampler.draw(rng) == 0;
  // 5 standard deviations
  CHECK(std::abs(hits / double(n) - 0.125) < 5 * std::sqrt(0.125 * 0.875 / n));
}

TEST_CASE("sample_path positions are running products") {
  const FiniteMeasure pi = build_pi_rho(free_group_srw(2), 0.4);
  const PathSample p = sample_path(pi, 30, 5, 2);
  REQUIRE(p.positions.size() == 31);
  for (std::size_t i = 0; i < p.increments.size(); ++i)
    CHECK(p.positions[i + 1] == multiply(p.positions[i], p.increments[i]));
  const PathSample q = sample_path(pi, 30, 5, 2);
  CHECK(q.positions.back() == p.positions.back());
}
