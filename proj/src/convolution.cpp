#include "noisywalk/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "noisywalk/errors.hpp"

namespace noisywalk {

namespace mp = boost::multiprecision;

namespace {

using PackedKey = std::uint64_t;

constexpr PackedKey pack(std::uint32_t a, std::uint32_t b) noexcept {
  return (static_cast<PackedKey>(a) << 32) | b;
}
constexpr std::uint32_t high(PackedKey k) noexcept { return static_cast<std::uint32_t>(k >> 32); }
constexpr std::uint32_t low(PackedKey k) noexcept { return static_cast<std::uint32_t>(k); }

/// Right multiplication x ↦ x·s by the step's coordinate words, memoized
/// per (table id, step word).
class Multiplier {
 public:
  explicit Multiplier(WordTable& table) : table_(table) {}

  std::uint32_t add_step_word(const Word& w) {
    const std::uint32_t id = table_.intern(w);
    for (std::size_t s = 0; s < step_ids_.size(); ++s)
      if (step_ids_[s] == id) return static_cast<std::uint32_t>(s);
    step_ids_.push_back(id);
    cache_.clear();
    return static_cast<std::uint32_t>(step_ids_.size() - 1);
  }

  std::uint32_t operator()(std::uint32_t id, std::uint32_t s) {
    const std::size_t width = step_ids_.size();
    const std::size_t slot = static_cast<std::size_t>(id) * width + s;
    if (slot >= cache_.size()) cache_.resize(std::max(slot + 1, table_.size() * width), kUnknown);
    std::uint32_t& out = cache_[slot];
    if (out == kUnknown) out = table_.intern(multiply(table_.word(id), table_.word(step_ids_[s])));
    return out;
  }

 private:
  static constexpr std::uint32_t kUnknown = std::numeric_limits<std::uint32_t>::max();
  WordTable& table_;
  std::vector<std::uint32_t> step_ids_;
  std::vector<std::uint32_t> cache_;
};

template <typename Num>
struct Level {
  std::vector<PackedKey> keys;  // sorted by packed id
  std::vector<Num> weights;
  double lost_mass = 0.0;
};

template <typename Num>
struct StepAtom {
  std::uint32_t s1;
  std::uint32_t s2;
  Num weight;
};

template <typename Num>
double as_double(const Num& w, const BigInt& denominator) {
  if constexpr (std::is_same_v<Num, double>) {
    return w;
  } else if constexpr (std::is_same_v<Num, std::uint64_t>) {
    return static_cast<double>(static_cast<long double>(w) / denominator.convert_to<long double>());
  } else {
    return Rational(w, denominator).convert_to<double>();
  }
}

template <typename Num>
std::vector<Level<Num>> run_levels(const std::vector<StepAtom<Num>>& step, Multiplier& mul,
                                   std::uint32_t identity, int n, const ConvolutionOptions& opt,
                                   const std::vector<BigInt>& level_denominators) {
  std::vector<Level<Num>> levels;
  levels.reserve(static_cast<std::size_t>(n));
  Level<Num> origin;
  origin.keys.push_back(pack(identity, identity));
  origin.weights.push_back(Num(1));
  const Level<Num>* current = &origin;

  absl::flat_hash_map<PackedKey, Num> acc;
  double lost = 0.0;
  for (int level = 1; level <= n; ++level) {
    acc.clear();
    acc.reserve(std::min(opt.cap + 1, current->keys.size() * step.size()));
    for (std::size_t i = 0; i < current->keys.size(); ++i) {
      const std::uint32_t a = high(current->keys[i]);
      const std::uint32_t b = low(current->keys[i]);
      const Num& w = current->weights[i];
      for (const auto& st : step) acc[pack(mul(a, st.s1), mul(b, st.s2))] += w * st.weight;
    }

    Level<Num> next;
    next.keys.reserve(acc.size());
    for (const auto& kv : acc) next.keys.push_back(kv.first);
    std::sort(next.keys.begin(), next.keys.end());

    if (next.keys.size() > opt.cap) {
      // Rank by mass, ties toward the smaller key, and keep the heaviest cap.
      std::vector<std::pair<double, PackedKey>> by_mass;
      by_mass.reserve(next.keys.size());
      const BigInt& den = level_denominators[static_cast<std::size_t>(level)];
      for (PackedKey k : next.keys) by_mass.emplace_back(as_double(acc.at(k), den), k);
      std::sort(by_mass.begin(), by_mass.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
      });
      double dropped = 0.0;
      for (std::size_t i = opt.cap; i < by_mass.size(); ++i) dropped += by_mass[i].first;
      if (opt.on_overflow == OverflowPolicy::error)
        throw TruncationError("convolution support at step " + std::to_string(level) + " is " +
                                  std::to_string(by_mass.size()) + " atoms, over the cap of " +
                                  std::to_string(opt.cap),
                              level, lost + dropped);
      lost += dropped;
      next.keys.clear();
      for (std::size_t i = 0; i < opt.cap; ++i) next.keys.push_back(by_mass[i].second);
      std::sort(next.keys.begin(), next.keys.end());
    }
    next.weights.reserve(next.keys.size());
    for (PackedKey k : next.keys) next.weights.push_back(std::move(acc.at(k)));
    next.lost_mass = lost;
    levels.push_back(std::move(next));
    current = &levels.back();  // no reallocation: capacity reserved above
  }
  return levels;
}

/// Maps packed id keys to atoms sorted in word order.
struct WordOrder {
  explicit WordOrder(const WordTable& table) : rank(table.size()) {
    std::vector<std::uint32_t> ids(table.size());
    std::iota(ids.begin(), ids.end(), 0u);
    std::sort(ids.begin(), ids.end(),
              [&](std::uint32_t x, std::uint32_t y) { return table.word(x) < table.word(y); });
    for (std::size_t r = 0; r < ids.size(); ++r) rank[ids[r]] = static_cast<std::uint32_t>(r);
  }
  std::vector<std::uint32_t> rank;
};

double binary_entropy(double e) {
  if (e <= 0.0 || e >= 1.0) return 0.0;
  return -e * std::log(e) - (1.0 - e) * std::log1p(-e);
}

template <typename Num>
std::vector<FiniteMeasure> materialize(std::vector<Level<Num>>& levels,
                                       const std::shared_ptr<const WordTable>& table,
                                       const WordOrder& order, MeasureKind kind,
                                       const std::vector<BigInt>& level_denominators,
                                       std::size_t step_support) {
  std::vector<FiniteMeasure> out;
  out.reserve(levels.size());
  for (std::size_t li = 0; li < levels.size(); ++li) {
    auto& level = levels[li];
    const BigInt& den = level_denominators[li + 1];
    std::vector<std::size_t> idx(level.keys.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      const PackedKey a = level.keys[x], b = level.keys[y];
      if (order.rank[high(a)] != order.rank[high(b)]) return order.rank[high(a)] < order.rank[high(b)];
      return order.rank[low(a)] < order.rank[low(b)];
    });
    std::vector<AtomKey> keys;
    std::vector<double> weights;
    keys.reserve(idx.size());
    weights.reserve(idx.size());
    for (std::size_t i : idx) {
      keys.push_back({high(level.keys[i]), low(level.keys[i])});
      weights.push_back(as_double(level.weights[i], den));
    }
    std::optional<ExactMasses> exact;
    if constexpr (std::is_same_v<Num, std::uint64_t>) {
      std::vector<std::uint64_t> num;
      num.reserve(idx.size());
      for (std::size_t i : idx) num.push_back(level.weights[i]);
      exact = ExactMasses(den, std::move(num));
    } else if constexpr (std::is_same_v<Num, BigInt>) {
      std::vector<BigInt> num;
      num.reserve(idx.size());
      for (std::size_t i : idx) num.push_back(std::move(level.weights[i]));
      exact = ExactMasses(den, std::move(num));
    }
    Truncation trunc;
    if (level.lost_mass > 0.0) {
      const double eps = level.lost_mass;
      double kept_entropy = 0.0;  // H(A) with A the renormalized kept part
      const double kept = 1.0 - eps;
      for (double w : weights)
        if (w > 0.0) kept_entropy -= (w / kept) * std::log(w / kept);
      trunc.lost_mass = eps;
      trunc.truncated = eps >= 1e-9;
      trunc.entropy_low = kept * kept_entropy;
      trunc.entropy_high = trunc.entropy_low +
                           eps * static_cast<double>(li + 1) *
                               std::log(static_cast<double>(step_support)) +
                           binary_entropy(eps);
    }
    out.emplace_back(table, kind, std::move(keys), std::move(weights), std::move(exact), trunc);
    level = {};
  }
  return out;
}

enum class Engine { floating, u64, big };

struct Family {
  const FiniteMeasure* step;
  Engine engine;
  std::vector<BigInt> denominators;  // index m: denominator of level m
};

template <typename Num>
std::vector<StepAtom<Num>> step_atoms(const FiniteMeasure& step, Multiplier& mul) {
  std::vector<StepAtom<Num>> atoms;
  for (std::size_t i = 0; i < step.size(); ++i) {
    StepAtom<Num> a{mul.add_step_word(step.first(i)), mul.add_step_word(step.second(i)), Num{}};
    if constexpr (std::is_same_v<Num, double>) {
      a.weight = step.weight(i);
    } else if constexpr (std::is_same_v<Num, std::uint64_t>) {
      a.weight = step.exact().numerator(i).template convert_to<std::uint64_t>();
    } else {
      a.weight = step.exact().numerator(i);
    }
    atoms.push_back(a);
  }
  return atoms;
}

}  // namespace

std::vector<std::vector<FiniteMeasure>> convolve_powers_shared(
    std::span<const FiniteMeasure* const> steps, int n, const ConvolutionOptions& options) {
  if (n < 1) throw InputError("convolve_power: n must be >= 1");
  if (steps.empty()) return {};
  if (options.cap == 0) throw InputError("convolve_power: cap must be positive");
  const int rank = steps.front()->rank();

  std::vector<Family> families;
  for (const FiniteMeasure* step : steps) {
    if (step->rank() != rank) throw InputError("convolve_powers_shared: rank mismatch");
    Family f{step, Engine::floating, {}};
    bool exact = false;
    switch (options.arithmetic) {
      case Arithmetic::exact:
        if (!step->is_exact()) throw UnsupportedRegimeError("exact convolution needs exact weights");
        if (options.on_overflow == OverflowPolicy::truncate)
          throw InputError("exact convolution cannot truncate");
        exact = true;
        break;
      case Arithmetic::automatic:
        exact = step->is_exact() && n <= options.exact_max_n &&
                options.on_overflow == OverflowPolicy::error;
        break;
      case Arithmetic::floating:
        break;
    }
    f.denominators.push_back(1);
    for (int m = 1; m <= n; ++m)
      f.denominators.push_back(exact ? BigInt(f.denominators.back() * step->exact().denominator())
                                     : BigInt(1));
    if (exact) {
      const BigInt limit = std::numeric_limits<std::uint64_t>::max();
      f.engine = f.denominators.back() <= limit ? Engine::u64 : Engine::big;
    }
    families.push_back(std::move(f));
  }

  auto table = std::make_shared<WordTable>(rank);
  // Run every family first so the table is complete before atoms are sorted.
  std::vector<std::vector<Level<double>>> float_levels(families.size());
  std::vector<std::vector<Level<std::uint64_t>>> u64_levels(families.size());
  std::vector<std::vector<Level<BigInt>>> big_levels(families.size());
  for (std::size_t j = 0; j < families.size(); ++j) {
    const Family& f = families[j];
    Multiplier mul(*table);
    switch (f.engine) {
      case Engine::floating:
        float_levels[j] = run_levels(step_atoms<double>(*f.step, mul), mul, table->identity(), n,
                                     options, f.denominators);
        break;
      case Engine::u64:
        u64_levels[j] = run_levels(step_atoms<std::uint64_t>(*f.step, mul), mul,
                                   table->identity(), n, options, f.denominators);
        break;
      case Engine::big:
        big_levels[j] = run_levels(step_atoms<BigInt>(*f.step, mul), mul, table->identity(), n,
                                   options, f.denominators);
        break;
    }
  }

  const WordOrder order(*table);
  std::shared_ptr<const WordTable> frozen = table;
  std::vector<std::vector<FiniteMeasure>> out;
  for (std::size_t j = 0; j < families.size(); ++j) {
    const Family& f = families[j];
    const MeasureKind kind = f.step->kind();
    switch (f.engine) {
      case Engine::floating:
        out.push_back(materialize(float_levels[j], frozen, order, kind, f.denominators, f.step->size()));
        break;
      case Engine::u64:
        out.push_back(materialize(u64_levels[j], frozen, order, kind, f.denominators, f.step->size()));
        break;
      case Engine::big:
        out.push_back(materialize(big_levels[j], frozen, order, kind, f.denominators, f.step->size()));
        break;
    }
  }
  return out;
}

std::vector<FiniteMeasure> convolve_power(const FiniteMeasure& step, int n,
                                          const ConvolutionOptions& options) {
  const FiniteMeasure* steps[] = {&step};
  return std::move(convolve_powers_shared(steps, n, options).front());
}

}  // namespace noisywalk
