#include "noisywalk/word.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "noisywalk/errors.hpp"

namespace noisywalk {

namespace {

void check_rank(int rank) {
  if (rank < 1 || rank > kMaxRank)
    throw InputError("rank must lie in [1, " + std::to_string(kMaxRank) + "], got " +
                     std::to_string(rank));
}

void check_letter(int letter, int rank) {
  if (letter == 0 || std::abs(letter) > rank)
    throw InputError("generator index " + std::to_string(letter) + " out of range for rank " +
                     std::to_string(rank));
}

void check_same_rank(const Word& x, const Word& y) {
  if (x.rank() != y.rank())
    throw InputError("rank mismatch: " + std::to_string(x.rank()) + " vs " +
                     std::to_string(y.rank()));
}

}  // namespace

Word::Word(int rank) {
  check_rank(rank);
  rank_ = static_cast<std::uint8_t>(rank);
}

Word Word::reduce(std::span<const Letter> letters, int rank) {
  Word w(rank);
  for (Letter l : letters) {
    check_letter(l, rank);
    w.push(l);
  }
  return w;
}

Word Word::reduce(std::span<const Generator> letters, int rank) {
  Word w(rank);
  for (const Generator& g : letters) {
    if (g.sign != 1 && g.sign != -1) throw InputError("generator sign must be +1 or -1");
    if (g.index < 1) throw InputError("generator index must be >= 1");
    check_letter(g.index * g.sign, rank);
    w.push(g.letter());
  }
  return w;
}

Word Word::generator(int index, int rank, int sign) {
  const Generator g{index, sign};
  return reduce(std::span<const Generator>(&g, 1), rank);
}

Word Word::prefix(std::size_t n) const {
  Word w;
  w.rank_ = rank_;
  n = std::min(n, letters_.size());
  w.letters_.assign(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(n));
  return w;
}

bool Word::is_reduced() const noexcept {
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    const int l = letters_[i];
    if (l == 0 || std::abs(l) > rank_) return false;
    if (i > 0 && letters_[i - 1] == -l) return false;
  }
  return true;
}

bool Word::is_positive() const noexcept {
  return std::all_of(letters_.begin(), letters_.end(), [](Letter l) { return l > 0; });
}

void Word::push(Letter letter) {
  if (!letters_.empty() && letters_.back() == -letter)
    letters_.pop_back();
  else
    letters_.push_back(letter);
}

bool operator==(const Word& a, const Word& b) noexcept {
  return a.rank_ == b.rank_ && std::equal(a.letters_.begin(), a.letters_.end(),
                                          b.letters_.begin(), b.letters_.end());
}

std::strong_ordering operator<=>(const Word& a, const Word& b) noexcept {
  auto c = std::lexicographical_compare_three_way(a.letters_.begin(), a.letters_.end(),
                                                  b.letters_.begin(), b.letters_.end());
  if (c != 0) return c;
  return a.rank_ <=> b.rank_;
}

Word multiply(const Word& x, const Word& y) {
  check_same_rank(x, y);
  // Cancel the longest suffix of x against the matching inverse prefix of y.
  const auto xl = x.letters();
  const auto yl = y.letters();
  std::size_t cancel = 0;
  while (cancel < xl.size() && cancel < yl.size() &&
         xl[xl.size() - 1 - cancel] == -yl[cancel])
    ++cancel;
  Word out = x.prefix(xl.size() - cancel);
  for (std::size_t i = cancel; i < yl.size(); ++i) out.push(yl[i]);
  return out;
}

Word inverse(const Word& x) {
  Word out = x.prefix(0);
  const auto l = x.letters();
  for (auto it = l.rbegin(); it != l.rend(); ++it) out.push(static_cast<Letter>(-*it));
  return out;
}

std::size_t distance(const Word& x, const Word& y) { return multiply(inverse(x), y).length(); }

std::size_t gromov_product(const Word& x, const Word& y) {
  check_same_rank(x, y);
  const auto a = x.letters();
  const auto b = y.letters();
  const auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
  return static_cast<std::size_t>(ia - a.begin());
}

WordPair multiply(const WordPair& x, const WordPair& y) {
  return {multiply(x.first, y.first), multiply(x.second, y.second)};
}

WordPair inverse(const WordPair& x) { return {inverse(x.first), inverse(x.second)}; }

std::size_t pair_length(const WordPair& x) {
  return std::max(x.first.length(), x.second.length());
}

std::size_t pair_gromov_product(const WordPair& u, const WordPair& v) {
  return std::min(gromov_product(u.first, v.first), gromov_product(u.second, v.second));
}

std::string to_string(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (Letter l : w.letters()) {
    if (!s.empty()) s += ' ';
    s += std::to_string(static_cast<int>(l));
  }
  return s;
}

std::string to_index_list(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (Letter l : w.letters()) {
    if (!s.empty()) s += ',';
    s += std::to_string(static_cast<int>(l));
  }
  return s;
}

std::vector<int> to_indices(const Word& w) {
  const auto l = w.letters();
  return {l.begin(), l.end()};
}

Word from_indices(std::span<const int> indices, int rank) {
  Word w(rank);
  for (int i : indices) {
    check_letter(i, rank);
    w.push(static_cast<Letter>(i));
  }
  return w;
}

}  // namespace noisywalk
