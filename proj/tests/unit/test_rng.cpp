#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "noisywalk/parallel.hpp"
#include "noisywalk/rng.hpp"

using namespace noisywalk;

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST_CASE("philox known answers") {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::encrypt(B{0, 0, 0, 0}, K{0, 0}) ==
        B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::encrypt(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            K{0xffffffffu, 0xffffffffu}) ==
        B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::encrypt(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            K{0xa4093822u, 0x299f31d0u}) ==
        B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are addressable and distinct") {
  Philox4x32 a(7, 3), b(7, 3), c(7, 4), d(7, 3, purpose::kReference), e(8, 3);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
  CHECK(x != e.next_u64());
}

TEST_CASE("draws are a pure function of the address") {
  Philox4x32 a(99, 5);
  std::vector<std::uint64_t> first;
  for (int i = 0; i < 10; ++i) first.push_back(a.next_u64());
  Philox4x32 b(99, 5);
  for (int i = 0; i < 10; ++i) CHECK(b.next_u64() == first[static_cast<std::size_t>(i)]);
}

TEST_CASE("uniform and below stay in range and look uniform") {
  Philox4x32 rng(1, 0);
  std::array<int, 6> counts{};
  double sum = 0.0;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    const auto k = rng.below(6);
    REQUIRE(k < 6);
    ++counts[k];
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
  // chi-square with 5 dof; 20.5 is the 0.999 quantile
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 6.0) * (c - n / 6.0) / (n / 6.0);
  CHECK(chi2 < 20.5);
}

TEST_CASE("run_trials output does not depend on worker count") {
  auto fn = [](std::size_t t) {
    Philox4x32 rng(5, t);
    return rng.uniform();
  };
  const auto one = run_trials(1000, 1, fn);
  const auto eight = run_trials(1000, 8, fn);
  CHECK(one == eight);
  CHECK(pairwise_sum(one) == pairwise_sum(eight));
}

TEST_CASE("run_trials propagates exceptions") {
  auto fn = [](std::size_t t) -> int {
    if (t == 37) throw std::runtime_error("boom");
    return 0;
  };
  CHECK_THROWS_AS(run_trials(100, 4, fn), std::runtime_error);
}

TEST_CASE("pairwise_sum") {
  std::vector<double> v(1000, 0.1);
  CHECK(std::abs(pairwise_sum(v) - 100.0) < 1e-12);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}
