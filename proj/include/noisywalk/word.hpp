#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace noisywalk {

/// Signed generator index: +i is the i-th free generator, -i its inverse.
using Letter = std::int8_t;

inline constexpr int kMaxRank = 127;

struct Generator {
  int index = 1;
  int sign = +1;

  Letter letter() const noexcept { return static_cast<Letter>(sign * index); }
  Generator inverse() const noexcept { return {index, -sign}; }
  friend bool operator==(const Generator&, const Generator&) = default;
};

/// Reduced word in the free group F_k.  The empty word is the identity.
///
/// Every Word value is reduced: no letter is immediately followed by its
/// inverse.  On the Cayley tree of F_k reduced words are geodesics, so
/// length() is the word-metric distance to the identity.
class Word {
 public:
  using Storage = boost::container::small_vector<Letter, 14>;

  Word() = default;
  explicit Word(int rank);

  /// Reduces an arbitrary letter sequence.  Throws InputError when a letter
  /// is zero or its index exceeds `rank`.
  static Word reduce(std::span<const Letter> letters, int rank);
  static Word reduce(std::span<const Generator> letters, int rank);

  /// Single generator word.
  static Word generator(int index, int rank, int sign = +1);

  int rank() const noexcept { return rank_; }
  std::size_t length() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  std::span<const Letter> letters() const noexcept {
    return {letters_.data(), letters_.size()};
  }
  Letter operator[](std::size_t i) const noexcept { return letters_[i]; }

  /// Prefix of the first `n` letters (clamped to length()).
  Word prefix(std::size_t n) const;

  /// True when the stored letters form a reduced word over the rank.
  bool is_reduced() const noexcept;

  /// True when no inverse letter occurs (free-semigroup fragment).
  bool is_positive() const noexcept;

  /// In-place right multiplication by a single letter.
  void push(Letter letter);

  friend bool operator==(const Word& a, const Word& b) noexcept;
  friend std::strong_ordering operator<=>(const Word& a, const Word& b) noexcept;

  template <typename H>
  friend H AbslHashValue(H h, const Word& w) {
    return H::combine(H::combine_contiguous(std::move(h), w.letters_.data(), w.letters_.size()),
                      w.letters_.size(), w.rank_);
  }

 private:
  Storage letters_;
  std::uint8_t rank_ = 0;
};

struct WordPair {
  Word first;
  Word second;

  friend bool operator==(const WordPair&, const WordPair&) = default;
  friend std::strong_ordering operator<=>(const WordPair& a, const WordPair& b) noexcept {
    if (auto c = a.first <=> b.first; c != 0) return c;
    return a.second <=> b.second;
  }
  template <typename H>
  friend H AbslHashValue(H h, const WordPair& p) {
    return H::combine(std::move(h), p.first, p.second);
  }
};

/// Reduced product x·y.  Throws InputError on rank mismatch.
Word multiply(const Word& x, const Word& y);
Word inverse(const Word& x);

/// d(x, y) = |x⁻¹y|.
std::size_t distance(const Word& x, const Word& y);

/// Gromov product (x|y)_o, computed as the common-prefix length.
std::size_t gromov_product(const Word& x, const Word& y);

/// Coordinatewise product and inverse on Γ×Γ.
WordPair multiply(const WordPair& x, const WordPair& y);
WordPair inverse(const WordPair& x);

/// d_×(o, x) = max of the coordinate lengths.
std::size_t pair_length(const WordPair& x);

/// min of the coordinate Gromov products; q_× = exp(-result).
std::size_t pair_gromov_product(const WordPair& u, const WordPair& v);

/// Space-separated signed indices, e.g. "1 -2"; identity is "e".
std::string to_string(const Word& w);

/// Comma-separated signed indices, identity "e" (tree export encoding).
std::string to_index_list(const Word& w);

std::vector<int> to_indices(const Word& w);
Word from_indices(std::span<const int> indices, int rank);

}  // namespace noisywalk
