#include <doctest.h>

#include <vector>

#include "noisywalk/errors.hpp"
#include "noisywalk/rng.hpp"
#include "noisywalk/word.hpp"

using namespace noisywalk;

namespace {

Word w(std::initializer_list<int> idx, int rank = 2) {
  const std::vector<int> v(idx);
  return from_indices(v, rank);
}

// Unreduced random letter string; reduction happens in Word::reduce.
std::vector<Letter> random_letters(Philox4x32& rng, int rank, int max_len) {
  const auto len = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len) + 1));
  std::vector<Letter> out;
  for (int i = 0; i < len; ++i) {
    const int idx = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rank)));
    out.push_back(static_cast<Letter>(rng.below(2) ? idx : -idx));
  }
  return out;
}

// Naive stack reduction kept separate from Word::push.
std::vector<Letter> naive_reduce(const std::vector<Letter>& s) {
  std::vector<Letter> out;
  bool changed = true;
  out = s;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      if (out[i] == -out[i + 1]) {
        out.erase(out.begin() + static_cast<long>(i), out.begin() + static_cast<long>(i) + 2);
        changed = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("reduction cancels adjacent inverse pairs") {
  CHECK(w({1, 2, -2, -1}).empty());
  CHECK(to_string(w({1, -2, 2})) == "1");
  CHECK(to_string(w({})) == "e");
  CHECK(w({2, 1, -1, 1}).length() == 2);
}

TEST_CASE("invalid letters are rejected") {
  const std::vector<int> bad{3};
  CHECK_THROWS_AS(from_indices(bad, 2), InputError);
  const std::vector<int> zero{1, 0};
  CHECK_THROWS_AS(from_indices(zero, 2), InputError);
  CHECK_THROWS_AS(Word(0), InputError);
  CHECK_THROWS_AS(Word(kMaxRank + 1), InputError);
  CHECK_THROWS_AS(Word::generator(1, 2, 0), InputError);
}

TEST_CASE("multiply and inverse") {
  CHECK(multiply(w({1, 2}), w({-2, 1})) == w({1, 1}));
  CHECK(multiply(w({1}), inverse(w({1}))).empty());
  CHECK(inverse(w({1, -2})) == w({2, -1}));
  CHECK_THROWS_AS(multiply(w({1}, 2), w({1}, 3)), InputError);
}

TEST_CASE("distance and gromov product") {
  CHECK(distance(w({1, 2}), w({1, -2})) == 2);
  CHECK(distance(w({1, 2}), w({-1})) == 3);
  CHECK(gromov_product(w({1, 2, 1}), w({1, 2, -1})) == 2);
  CHECK(gromov_product(w({1}), w({2})) == 0);
  // (x|y) = (|x| + |y| − d(x,y)) / 2 on a tree
  const Word x = w({1, 2, 2}), y = w({1, 2, -1, 2});
  CHECK(2 * gromov_product(x, y) == x.length() + y.length() - distance(x, y));
}

TEST_CASE("pair operations") {
  const WordPair a{w({1}), w({2, 2})};
  const WordPair b{w({-1}), w({1})};
  CHECK(pair_length(a) == 2);
  CHECK(multiply(a, b) == WordPair{Word(2), w({2, 2, 1})});
  CHECK(multiply(a, inverse(a)) == WordPair{Word(2), Word(2)});
  CHECK(pair_gromov_product(a, WordPair{w({1, 1}), w({2, 1})}) == 1);
}

TEST_CASE("encodings round trip") {
  const Word x = w({1, -2, -2});
  CHECK(to_index_list(x) == "1,-2,-2");
  CHECK(to_index_list(Word(2)) == "e");
  CHECK(from_indices(to_indices(x), 2) == x);
}

TEST_CASE("ordering is lexicographic on letters") {
  CHECK(w({-1}) < w({1}));
  CHECK(w({1}) < w({1, 2}));
  CHECK(Word(2) < w({-2}));
}

TEST_CASE("property: reduce matches naive cancellation") {
  Philox4x32 rng(11, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const int rank = 1 + static_cast<int>(rng.below(3));
    const auto s = random_letters(rng, rank, 12);
    const Word r = Word::reduce(s, rank);
    const auto expect = naive_reduce(s);
    REQUIRE(r.is_reduced());
    REQUIRE(std::vector<Letter>(r.letters().begin(), r.letters().end()) == expect);
  }
}

TEST_CASE("property: group axioms") {
  Philox4x32 rng(12, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const Word x = Word::reduce(random_letters(rng, 2, 8), 2);
    const Word y = Word::reduce(random_letters(rng, 2, 8), 2);
    const Word z = Word::reduce(random_letters(rng, 2, 8), 2);
    REQUIRE(multiply(multiply(x, y), z) == multiply(x, multiply(y, z)));
    REQUIRE(multiply(x, inverse(x)).empty());
    REQUIRE(inverse(multiply(x, y)) == multiply(inverse(y), inverse(x)));
    REQUIRE(distance(x, y) == distance(y, x));
    REQUIRE(distance(x, z) <= distance(x, y) + distance(y, z));
    REQUIRE(2 * gromov_product(x, y) == x.length() + y.length() - distance(x, y));
  }
}
