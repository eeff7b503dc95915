#include "noisywalk/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "noisywalk/errors.hpp"

namespace noisywalk {

namespace mp = boost::multiprecision;

std::string_view to_string(MeasureKind kind) noexcept {
  return kind == MeasureKind::single ? "single" : "pair";
}

namespace {

// cpp_int's string constructor reads a leading 0 as an octal prefix.
BigInt decimal_integer(std::string_view digits) {
  const std::size_t first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return 0;
  return BigInt(std::string(digits.substr(first)));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) throw InputError("empty number");
  auto parse_integer = [&](std::string_view s) {
    s = trim(s);
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw InputError("malformed number '" + std::string(text) + "'");
    BigInt v = decimal_integer(s);
    return negative ? BigInt(-v) : v;
  };

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const BigInt num = parse_integer(text.substr(0, slash));
    const BigInt den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  std::string_view mantissa = text;
  long exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    const std::string_view exp_text = text.substr(e + 1);
    const auto* last = exp_text.data() + exp_text.size();
    const char* begin = exp_text.data();
    if (begin != last && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, last, exponent);
    if (ec != std::errc() || ptr != last)
      throw InputError("malformed exponent in '" + std::string(text) + "'");
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '+' || mantissa.front() == '-')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long fraction_digits = 0;
  bool seen_point = false;
  for (char c : mantissa) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits += c;
      if (seen_point) ++fraction_digits;
    } else {
      throw InputError("malformed number '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw InputError("malformed number '" + std::string(text) + "'");
  BigInt num = decimal_integer(digits);
  if (negative) num = -num;
  const long scale = exponent - fraction_digits;
  if (std::abs(scale) > 4096) throw InputError("exponent out of range in '" + std::string(text) + "'");
  const BigInt ten_power = mp::pow(BigInt(10), static_cast<unsigned>(std::abs(scale)));
  return scale >= 0 ? Rational(num * ten_power) : Rational(num, ten_power);
}

Rational decimal_rational(double x) {
  if (!std::isfinite(x)) throw InputError("non-finite value");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return parse_rational(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

// ---------------------------------------------------------------------------

WordTable::WordTable(int rank) : rank_(rank) { intern(Word(rank)); }

std::uint32_t WordTable::intern(const Word& w) {
  if (w.rank() != rank_) throw InputError("word rank does not match table rank");
  const auto [it, inserted] = index_.try_emplace(w, static_cast<std::uint32_t>(words_.size()));
  if (inserted) words_.push_back(w);
  return it->second;
}

std::optional<std::uint32_t> WordTable::find(const Word& w) const {
  const auto it = index_.find(w);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

ExactMasses::ExactMasses(BigInt denominator, std::vector<std::uint64_t> numerators)
    : denominator_(std::move(denominator)), small_(true), narrow_(std::move(numerators)) {}

ExactMasses::ExactMasses(BigInt denominator, std::vector<BigInt> numerators)
    : denominator_(std::move(denominator)) {
  const BigInt limit = std::numeric_limits<std::uint64_t>::max();
  small_ = std::all_of(numerators.begin(), numerators.end(),
                       [&](const BigInt& v) { return v >= 0 && v <= limit; });
  if (small_) {
    narrow_.reserve(numerators.size());
    for (const auto& v : numerators) narrow_.push_back(v.convert_to<std::uint64_t>());
  } else {
    wide_ = std::move(numerators);
  }
}

BigInt ExactMasses::numerator(std::size_t i) const {
  return small_ ? BigInt(narrow_[i]) : wide_[i];
}

// ---------------------------------------------------------------------------

namespace {

template <typename Key>
void check_rank(const Key& k, int rank);

template <>
void check_rank<Word>(const Word& k, int rank) {
  if (k.rank() != rank) throw InputError("atom rank does not match measure rank");
}

template <>
void check_rank<WordPair>(const WordPair& k, int rank) {
  check_rank(k.first, rank);
  check_rank(k.second, rank);
}

AtomKey intern_key(WordTable& table, const Word& w) { return {table.intern(w), table.identity()}; }
AtomKey intern_key(WordTable& table, const WordPair& w) {
  return {table.intern(w.first), table.intern(w.second)};
}

template <typename Key>
FiniteMeasure build_float(int rank, MeasureKind kind,
                          std::span<const std::pair<Key, double>> support) {
  std::map<Key, double> merged;
  for (const auto& [key, w] : support) {
    check_rank(key, rank);
    if (!std::isfinite(w) || w < 0.0) throw InputError("weights must be finite and nonnegative");
    if (w > 0.0) merged[key] += w;
  }
  if (merged.empty()) throw ValidationError("measure has empty support");
  double total = 0.0;
  for (const auto& kv : merged) total += kv.second;
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("weights sum to " + std::to_string(total) + ", not 1");

  auto table = std::make_shared<WordTable>(rank);
  std::vector<AtomKey> keys;
  std::vector<double> weights;
  for (const auto& [key, w] : merged) {
    keys.push_back(intern_key(*table, key));
    weights.push_back(w);
  }
  return FiniteMeasure(std::move(table), kind, std::move(keys), std::move(weights), std::nullopt);
}

template <typename Key>
FiniteMeasure build_exact(int rank, MeasureKind kind,
                          std::span<const std::pair<Key, Rational>> support) {
  std::map<Key, Rational> merged;
  for (const auto& [key, w] : support) {
    check_rank(key, rank);
    if (w < 0) throw InputError("weights must be nonnegative");
    if (w > 0) merged[key] += w;
  }
  if (merged.empty()) throw ValidationError("measure has empty support");
  Rational total = 0;
  BigInt denominator = 1;
  for (const auto& kv : merged) {
    total += kv.second;
    denominator = mp::lcm(denominator, mp::denominator(kv.second));
  }
  if (total != 1)
    throw ValidationError("weights sum to " + total.str() + ", not exactly 1");

  auto table = std::make_shared<WordTable>(rank);
  std::vector<AtomKey> keys;
  std::vector<double> weights;
  std::vector<BigInt> numerators;
  for (const auto& [key, w] : merged) {
    keys.push_back(intern_key(*table, key));
    weights.push_back(w.template convert_to<double>());
    numerators.push_back(mp::numerator(w) * (denominator / mp::denominator(w)));
  }
  return FiniteMeasure(std::move(table), kind, std::move(keys), std::move(weights),
                       ExactMasses(std::move(denominator), std::move(numerators)));
}

}  // namespace

FiniteMeasure FiniteMeasure::build(int rank, std::span<const std::pair<Word, double>> support) {
  return build_float<Word>(rank, MeasureKind::single, support);
}

FiniteMeasure FiniteMeasure::build(int rank, std::span<const std::pair<Word, Rational>> support) {
  return build_exact<Word>(rank, MeasureKind::single, support);
}

FiniteMeasure FiniteMeasure::build_pair(int rank,
                                        std::span<const std::pair<WordPair, double>> support) {
  return build_float<WordPair>(rank, MeasureKind::pair, support);
}

FiniteMeasure FiniteMeasure::build_pair(int rank,
                                        std::span<const std::pair<WordPair, Rational>> support) {
  return build_exact<WordPair>(rank, MeasureKind::pair, support);
}

FiniteMeasure FiniteMeasure::uniform(int rank, std::span<const Word> words) {
  if (words.empty()) throw ValidationError("measure has empty support");
  std::vector<std::pair<Word, Rational>> support;
  const Rational w(1, static_cast<long>(words.size()));
  for (const auto& x : words) support.emplace_back(x, w);
  std::vector<Word> sorted(words.begin(), words.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InputError("uniform measure support has duplicate words");
  return build(rank, support);
}

FiniteMeasure::FiniteMeasure(std::shared_ptr<const WordTable> table, MeasureKind kind,
                             std::vector<AtomKey> keys, std::vector<double> weights,
                             std::optional<ExactMasses> exact, Truncation truncation)
    : table_(std::move(table)),
      kind_(kind),
      keys_(std::move(keys)),
      weights_(std::move(weights)),
      exact_(std::move(exact)),
      truncation_(truncation) {
  if (keys_.size() != weights_.size() || (exact_ && exact_->size() != keys_.size()))
    throw InputError("FiniteMeasure: atom arrays disagree in length");
}

const ExactMasses& FiniteMeasure::exact() const {
  if (!exact_) throw UnsupportedRegimeError("measure has no exact weights");
  return *exact_;
}

Rational FiniteMeasure::exact_weight(std::size_t i) const {
  const auto& e = exact();
  return Rational(e.numerator(i), e.denominator());
}

bool FiniteMeasure::is_positive() const {
  for (const auto& k : keys_)
    if (!table_->word(k.first).is_positive() || !table_->word(k.second).is_positive()) return false;
  return true;
}

std::optional<std::size_t> FiniteMeasure::find(const WordPair& x) const {
  auto less = [&](const AtomKey& k, const WordPair& v) {
    return WordPair{table_->word(k.first), table_->word(k.second)} < v;
  };
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), x, less);
  if (it == keys_.end() || table_->word(it->first) != x.first ||
      table_->word(it->second) != x.second)
    return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin());
}

std::optional<std::size_t> FiniteMeasure::find(const Word& x) const {
  if (kind_ != MeasureKind::single) throw InputError("find(Word) on a pair measure");
  return find(WordPair{x, Word(x.rank())});
}

double FiniteMeasure::mass(const Word& x) const {
  const auto i = find(x);
  return i ? weights_[*i] : 0.0;
}

double FiniteMeasure::mass(const WordPair& x) const {
  const auto i = find(x);
  return i ? weights_[*i] : 0.0;
}

// ---------------------------------------------------------------------------

FiniteMeasure build_pi_rho(const FiniteMeasure& mu, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("rho must lie in [0, 1]");
  if (mu.is_exact()) return build_pi_rho(mu, decimal_rational(rho));
  if (mu.kind() != MeasureKind::single) throw InputError("build_pi_rho needs a single-kind mu");

  std::vector<AtomKey> keys;
  std::vector<double> weights;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < mu.size(); ++j) {
      double w = rho * mu.weight(i) * mu.weight(j);
      if (i == j) w += (1.0 - rho) * mu.weight(i);
      if (w > 0.0) {
        keys.push_back({mu.keys()[i].first, mu.keys()[j].first});
        weights.push_back(w);
      }
    }
  }
  return FiniteMeasure(mu.table(), MeasureKind::pair, std::move(keys), std::move(weights),
                       std::nullopt);
}

FiniteMeasure build_pi_rho(const FiniteMeasure& mu, const Rational& rho) {
  if (rho < 0 || rho > 1) throw InputError("rho must lie in [0, 1]");
  if (mu.kind() != MeasureKind::single) throw InputError("build_pi_rho needs a single-kind mu");
  if (!mu.is_exact()) return build_pi_rho(mu, rho.convert_to<double>());

  const auto& e = mu.exact();
  const BigInt r = mp::numerator(rho);
  const BigInt s = mp::denominator(rho);
  const BigInt& d = e.denominator();
  // Over the denominator s·d²: r·a_i·a_j + (s−r)·[i=j]·a_i·d.
  std::vector<AtomKey> keys;
  std::vector<BigInt> numerators;
  BigInt g = s * d * d;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const BigInt ai = e.numerator(i);
    for (std::size_t j = 0; j < mu.size(); ++j) {
      BigInt w = r * ai * e.numerator(j);
      if (i == j) w += (s - r) * ai * d;
      if (w > 0) {
        keys.push_back({mu.keys()[i].first, mu.keys()[j].first});
        g = mp::gcd(g, w);
        numerators.push_back(std::move(w));
      }
    }
  }
  BigInt denominator = s * d * d / g;
  std::vector<double> weights;
  weights.reserve(numerators.size());
  for (auto& w : numerators) {
    w /= g;
    weights.push_back(Rational(w, denominator).convert_to<double>());
  }
  return FiniteMeasure(mu.table(), MeasureKind::pair, std::move(keys), std::move(weights),
                       ExactMasses(std::move(denominator), std::move(numerators)));
}

FiniteMeasure marginal(const FiniteMeasure& pair, int coordinate) {
  if (pair.kind() != MeasureKind::pair) throw InputError("marginal of a single-kind measure");
  if (coordinate != 0 && coordinate != 1) throw InputError("coordinate must be 0 or 1");
  const auto& table = pair.table();
  std::map<Word, std::size_t> slot;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> atom_slot(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) {
    const std::uint32_t id = coordinate == 0 ? pair.keys()[i].first : pair.keys()[i].second;
    const auto [it, inserted] = slot.try_emplace(table->word(id), ids.size());
    if (inserted) ids.push_back(id);
    atom_slot[i] = it->second;
  }
  // Renumber slots into word order.
  std::vector<std::size_t> rank_of(ids.size());
  std::size_t r = 0;
  for (const auto& kv : slot) rank_of[kv.second] = r++;

  std::vector<AtomKey> keys(ids.size());
  for (std::size_t s = 0; s < ids.size(); ++s) keys[rank_of[s]] = {ids[s], table->identity()};
  std::vector<double> weights(ids.size(), 0.0);
  std::optional<ExactMasses> exact;
  if (pair.is_exact()) {
    std::vector<BigInt> num(ids.size());
    for (std::size_t i = 0; i < pair.size(); ++i) num[rank_of[atom_slot[i]]] += pair.exact().numerator(i);
    for (std::size_t s = 0; s < num.size(); ++s)
      weights[s] = Rational(num[s], pair.exact().denominator()).convert_to<double>();
    exact = ExactMasses(pair.exact().denominator(), std::move(num));
  } else {
    for (std::size_t i = 0; i < pair.size(); ++i) weights[rank_of[atom_slot[i]]] += pair.weight(i);
  }
  return FiniteMeasure(table, MeasureKind::single, std::move(keys), std::move(weights),
                       std::move(exact));
}

namespace {

long double to_ld(const BigInt& v) { return v.convert_to<long double>(); }

}  // namespace

double shannon_entropy(const FiniteMeasure& m) {
  long double sum = 0.0L;
  long double comp = 0.0L;
  auto add = [&](long double x) {
    const long double y = x - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  if (m.is_exact()) {
    const auto& e = m.exact();
    const long double log_den = std::log(to_ld(e.denominator()));
    const long double den = to_ld(e.denominator());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const long double c = to_ld(e.numerator(i));
      add(-(c / den) * (std::log(c) - log_den));
    }
  } else {
    for (double w : m.weights())
      if (w > 0.0) add(-static_cast<long double>(w) * std::log(static_cast<long double>(w)));
  }
  return static_cast<double>(sum);
}

double first_moment(const FiniteMeasure& m) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::size_t len = m.kind() == MeasureKind::pair
                                ? std::max(m.first(i).length(), m.second(i).length())
                                : m.first(i).length();
    s += static_cast<long double>(m.weight(i)) * static_cast<long double>(len);
  }
  return static_cast<double>(s);
}

FiniteMeasure free_group_srw(int k) {
  if (k < 1) throw InputError("free group rank must be >= 1");
  std::vector<Word> gens;
  for (int i = 1; i <= k; ++i) {
    gens.push_back(Word::generator(i, k, +1));
    gens.push_back(Word::generator(i, k, -1));
  }
  return FiniteMeasure::uniform(k, gens);
}

FiniteMeasure free_semigroup_uniform(int m) {
  if (m < 1) throw InputError("alphabet size must be >= 1");
  std::vector<Word> gens;
  for (int i = 1; i <= m; ++i) gens.push_back(Word::generator(i, m, +1));
  return FiniteMeasure::uniform(m, gens);
}

// ---------------------------------------------------------------------------

namespace {

/// Index of each table id of `mu_n` in its atom list, looked up by word when
/// the pair measure uses a different table.
class SingleLookup {
 public:
  SingleLookup(const FiniteMeasure& mu_n, const WordTable& pair_table)
      : mu_(mu_n), same_table_(mu_n.table().get() == &pair_table), pair_table_(pair_table) {
    if (same_table_) {
      by_id_.assign(pair_table.size(), kMissing);
      for (std::size_t i = 0; i < mu_n.size(); ++i) by_id_[mu_n.keys()[i].first] = i;
    }
  }

  std::size_t index(std::uint32_t pair_id) const {
    std::size_t i = kMissing;
    if (same_table_) {
      i = pair_id < by_id_.size() ? by_id_[pair_id] : kMissing;
    } else if (auto f = mu_.find(pair_table_.word(pair_id))) {
      i = *f;
    }
    if (i == kMissing)
      throw ValidationError("pair measure charges a word outside the support of mu_n");
    return i;
  }

 private:
  static constexpr std::size_t kMissing = std::numeric_limits<std::size_t>::max();
  const FiniteMeasure& mu_;
  bool same_table_;
  const WordTable& pair_table_;
  std::vector<std::size_t> by_id_;
};

}  // namespace

EntropyGaps entropy_gaps(const FiniteMeasure& mu_n, const FiniteMeasure& pi_n) {
  if (mu_n.kind() != MeasureKind::single || pi_n.kind() != MeasureKind::pair)
    throw InputError("entropy_gaps needs (single, pair) measures");
  if (mu_n.rank() != pi_n.rank()) throw InputError("rank mismatch");

  EntropyGaps g;
  g.entropy_single = shannon_entropy(mu_n);
  g.entropy_pair = shannon_entropy(pi_n);
  g.exact_inputs = mu_n.is_exact() && pi_n.is_exact();

  const SingleLookup lookup(mu_n, *pi_n.table());
  constexpr long double eps = std::numeric_limits<long double>::epsilon();
  long double lower = 0.0L, upper = 0.0L, bound = 0.0L;
  bool lower_zero = true, upper_zero = true;

  if (g.exact_inputs) {
    const auto& em = mu_n.exact();
    const auto& ep = pi_n.exact();
    const BigInt& dm = em.denominator();
    const BigInt& dp = ep.denominator();
    const BigInt dm2 = dm * dm;
    for (std::size_t i = 0; i < pi_n.size(); ++i) {
      const BigInt p = ep.numerator(i);
      const BigInt a = em.numerator(lookup.index(pi_n.keys()[i].first));
      const BigInt b = em.numerator(lookup.index(pi_n.keys()[i].second));
      const long double w = to_ld(p) / to_ld(dp);
      // π/μ(u) = p·dm / (a·dp)
      const BigInt ln = p * dm, ld = a * dp;
      if (ln != ld) {
        lower_zero = false;
        lower -= w * std::log(to_ld(ln) / to_ld(ld));
      }
      // π/(μ(u)μ(v)) = p·dm² / (a·b·dp)
      const BigInt un = p * dm2, ud = a * b * dp;
      if (un != ud) {
        upper_zero = false;
        upper += w * std::log(to_ld(un) / to_ld(ud));
      }
      bound += w * 8.0L * eps;
    }
  } else {
    for (std::size_t i = 0; i < pi_n.size(); ++i) {
      const long double w = pi_n.weight(i);
      const long double a = mu_n.weight(lookup.index(pi_n.keys()[i].first));
      const long double b = mu_n.weight(lookup.index(pi_n.keys()[i].second));
      if (w != a) {
        lower_zero = false;
        lower -= w * std::log(w / a);
      }
      if (w != a * b) {
        upper_zero = false;
        upper += w * std::log(w / (a * b));
      }
      bound += w * (8.0L * eps + std::abs(std::log(w)) * 4.0L * eps);
    }
  }
  bound += static_cast<long double>(pi_n.size()) * eps * (std::abs(lower) + std::abs(upper) + 1.0L);
  g.lower_gap = static_cast<double>(lower);
  g.upper_gap = static_cast<double>(upper);
  g.lower_exact_zero = lower_zero;
  g.upper_exact_zero = upper_zero;
  g.error_bound = static_cast<double>(bound);
  return g;
}

// ---------------------------------------------------------------------------

AtomSampler::AtomSampler(const FiniteMeasure& m) : cdf_(m.size()) {
  std::partial_sum(m.weights().begin(), m.weights().end(), cdf_.begin());
}

std::size_t AtomSampler::draw(Philox4x32& rng) const noexcept {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

PathSample sample_path(const FiniteMeasure& step, int n, std::uint64_t seed, std::uint64_t stream) {
  if (n < 0) throw InputError("sample_path: n must be >= 0");
  PathSample path;
  path.seed = seed;
  path.stream = stream;
  const AtomSampler sampler(step);
  Philox4x32 rng(seed, stream, purpose::kWalk);
  WordPair position{Word(step.rank()), Word(step.rank())};
  path.positions.push_back(position);
  for (int i = 0; i < n; ++i) {
    const std::size_t a = sampler.draw(rng);
    WordPair inc{step.first(a), step.second(a)};
    position = multiply(position, inc);
    path.increments.push_back(std::move(inc));
    path.positions.push_back(position);
  }
  return path;
}

}  // namespace noisywalk
