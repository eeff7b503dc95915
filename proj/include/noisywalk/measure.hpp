#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <boost/multiprecision/cpp_int.hpp>

#include "noisywalk/rng.hpp"
#include "noisywalk/word.hpp"

namespace noisywalk {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class MeasureKind { single, pair };

std::string_view to_string(MeasureKind kind) noexcept;

/// Parses "0.375", "3/8", "1e-3" or "1" into an exact rational.
Rational parse_rational(std::string_view text);

/// Exact decimal value of the shortest string that round-trips `x`,
/// so 0.1 becomes 1/10 rather than the nearest binary fraction.
Rational decimal_rational(double x);

/// Interned words shared by a family of measures.  Ids are dense and stable.
class WordTable {
 public:
  explicit WordTable(int rank);

  int rank() const noexcept { return rank_; }
  std::size_t size() const noexcept { return words_.size(); }
  const Word& word(std::uint32_t id) const { return words_[id]; }
  std::uint32_t identity() const noexcept { return 0; }

  std::uint32_t intern(const Word& w);
  std::optional<std::uint32_t> find(const Word& w) const;

 private:
  int rank_;
  std::vector<Word> words_;
  absl::flat_hash_map<Word, std::uint32_t> index_;
};

struct AtomKey {
  std::uint32_t first = 0;
  std::uint32_t second = 0;
  friend bool operator==(const AtomKey&, const AtomKey&) = default;
};

/// Exact masses stored as integer numerators over one common denominator.
class ExactMasses {
 public:
  ExactMasses() = default;
  ExactMasses(BigInt denominator, std::vector<std::uint64_t> numerators);
  ExactMasses(BigInt denominator, std::vector<BigInt> numerators);

  const BigInt& denominator() const noexcept { return denominator_; }
  BigInt numerator(std::size_t i) const;
  std::size_t size() const noexcept { return small_ ? narrow_.size() : wide_.size(); }
  bool fits_u64() const noexcept { return small_; }
  std::span<const std::uint64_t> narrow() const noexcept { return narrow_; }

 private:
  BigInt denominator_{1};
  bool small_ = true;
  std::vector<std::uint64_t> narrow_;
  std::vector<BigInt> wide_;
};

struct Truncation {
  bool truncated = false;  // true when lost_mass >= 1e-9
  double lost_mass = 0.0;
  /// Bracket on the Shannon entropy of the untruncated measure.
  double entropy_low = 0.0;
  double entropy_high = 0.0;
};

/// Finitely supported probability measure on Γ (single) or Γ×Γ (pair).
///
/// Atoms are kept in lexicographic order of their signed-letter sequences
/// (first coordinate, then second); this order fixes the inverse-CDF
/// sampling map.  Every atom has positive weight.  When built from rational
/// weights the measure also carries exact masses.
class FiniteMeasure {
 public:
  /// Single-kind measure from float weights.  Zero weights are dropped,
  /// duplicates merged.  Throws ValidationError when the total differs from
  /// 1 by more than 1e-12 or the support is empty; InputError on a negative
  /// weight.
  static FiniteMeasure build(int rank, std::span<const std::pair<Word, double>> support);
  /// As above with exact weights that must sum to exactly 1.
  static FiniteMeasure build(int rank, std::span<const std::pair<Word, Rational>> support);
  static FiniteMeasure build_pair(int rank, std::span<const std::pair<WordPair, double>> support);
  static FiniteMeasure build_pair(int rank,
                                  std::span<const std::pair<WordPair, Rational>> support);

  /// Uniform measure on the given words (duplicates rejected), exact.
  static FiniteMeasure uniform(int rank, std::span<const Word> words);

  /// Internal constructor: atoms must already be sorted, positive and
  /// normalized.
  FiniteMeasure(std::shared_ptr<const WordTable> table, MeasureKind kind,
                std::vector<AtomKey> keys, std::vector<double> weights,
                std::optional<ExactMasses> exact, Truncation truncation = {});

  int rank() const noexcept { return table_->rank(); }
  MeasureKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return keys_.size(); }

  const Word& first(std::size_t i) const { return table_->word(keys_[i].first); }
  const Word& second(std::size_t i) const { return table_->word(keys_[i].second); }
  WordPair element(std::size_t i) const { return {first(i), second(i)}; }
  double weight(std::size_t i) const { return weights_[i]; }

  std::span<const AtomKey> keys() const noexcept { return keys_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::shared_ptr<const WordTable>& table() const noexcept { return table_; }

  bool is_exact() const noexcept { return exact_.has_value(); }
  const ExactMasses& exact() const;
  Rational exact_weight(std::size_t i) const;

  /// True when no atom uses an inverse letter.
  bool is_positive() const;

  std::optional<std::size_t> find(const Word& x) const;
  std::optional<std::size_t> find(const WordPair& x) const;
  double mass(const Word& x) const;
  double mass(const WordPair& x) const;

  const Truncation& truncation() const noexcept { return truncation_; }

 private:
  std::shared_ptr<const WordTable> table_;
  MeasureKind kind_;
  std::vector<AtomKey> keys_;
  std::vector<double> weights_;
  std::optional<ExactMasses> exact_;
  Truncation truncation_;
};

/// π^ρ = ρ·μ×μ + (1−ρ)·μ_diag.  Exact when `mu` is exact; a double `rho` is
/// read as its shortest decimal representation.  Throws InputError when
/// rho ∉ [0,1] or `mu` is not single-kind.
FiniteMeasure build_pi_rho(const FiniteMeasure& mu, double rho);
FiniteMeasure build_pi_rho(const FiniteMeasure& mu, const Rational& rho);

/// Marginal of a pair measure on the given coordinate (0 or 1).
FiniteMeasure marginal(const FiniteMeasure& pair, int coordinate);

/// Shannon entropy in nats with 0·log 0 = 0.  Uses exact masses when present.
double shannon_entropy(const FiniteMeasure& m);

/// Σ |x| m(x), with |(x₁,x₂)| = max(|x₁|,|x₂|) for pairs.
double first_moment(const FiniteMeasure& m);

/// Standard step measures.
FiniteMeasure free_group_srw(int k);    // uniform on {a_i^{±1}}
FiniteMeasure free_semigroup_uniform(int m);  // uniform on {a_1..a_m}

/// Gaps of the entropy sandwich H(μ_n) ≤ H(π_n) ≤ 2H(μ_n), evaluated term
/// by term against the separately computed marginal law μ_n:
///   lower_gap = H(π_n) − H(μ_n) = Σ −π(u,v) log(π(u,v)/μ(u))
///   upper_gap = 2H(μ_n) − H(π_n) = Σ π(u,v) log(π(u,v)/(μ(u)μ(v)))
/// Terms whose ratio is exactly 1 contribute exactly 0, so the equality
/// cases ρ = 0 and ρ = 1 come out as exact zeros with exact inputs.
struct EntropyGaps {
  double entropy_single = 0.0;
  double entropy_pair = 0.0;
  double lower_gap = 0.0;
  double upper_gap = 0.0;
  double error_bound = 0.0;  // rounding bound on each gap
  bool lower_exact_zero = false;
  bool upper_exact_zero = false;
  bool exact_inputs = false;
  /// Each inequality holds: either the gap is an exact zero or it exceeds
  /// its rounding bound.
  bool lower_certified() const noexcept { return lower_exact_zero || lower_gap > error_bound; }
  bool upper_certified() const noexcept { return upper_exact_zero || upper_gap > error_bound; }
};

EntropyGaps entropy_gaps(const FiniteMeasure& mu_n, const FiniteMeasure& pi_n);

/// Inverse-CDF sampler over the fixed atom order.
class AtomSampler {
 public:
  explicit AtomSampler(const FiniteMeasure& m);
  std::size_t draw(Philox4x32& rng) const noexcept;
  std::size_t size() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

struct PathSample {
  std::vector<WordPair> increments;
  std::vector<WordPair> positions;  // positions[0] = (ε, ε)
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// n i.i.d. increments from `step` and the running products.  Single-kind
/// steps leave the second coordinate at the identity.
PathSample sample_path(const FiniteMeasure& step, int n, std::uint64_t seed, std::uint64_t stream);

}  // namespace noisywalk
