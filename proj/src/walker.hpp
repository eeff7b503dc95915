#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "noisywalk/measure.hpp"

namespace noisywalk::detail {

/// Reduced word kept as a plain letter stack for fast in-place walking.
struct LetterStack {
  std::vector<Letter> letters;

  void push(Letter x) {
    if (!letters.empty() && letters.back() == -x)
      letters.pop_back();
    else
      letters.push_back(x);
  }
  void push_word(const std::vector<Letter>& w) {
    for (Letter x : w) push(x);
  }
  std::size_t length() const noexcept { return letters.size(); }
};

/// Coupled walk driven by one step measure.  Single-kind steps move only
/// the first coordinate.
class Walker {
 public:
  explicit Walker(const FiniteMeasure& step) : sampler_(step) {
    first_.reserve(step.size());
    second_.reserve(step.size());
    for (std::size_t i = 0; i < step.size(); ++i) {
      const auto a = step.first(i).letters();
      const auto b = step.second(i).letters();
      first_.emplace_back(a.begin(), a.end());
      second_.emplace_back(b.begin(), b.end());
    }
  }

  /// One increment; returns the atom index drawn.
  std::size_t step(Philox4x32& rng, LetterStack& x, LetterStack& y) const {
    const std::size_t i = sampler_.draw(rng);
    x.push_word(first_[i]);
    y.push_word(second_[i]);
    return i;
  }

 private:
  AtomSampler sampler_;
  std::vector<std::vector<Letter>> first_;
  std::vector<std::vector<Letter>> second_;
};

inline std::size_t common_prefix(const std::vector<Letter>& a, const std::vector<Letter>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

}  // namespace noisywalk::detail
