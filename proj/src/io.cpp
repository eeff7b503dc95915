#include "noisywalk/io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <vector>

#include "noisywalk/errors.hpp"

namespace noisywalk {

using nlohmann::json;

namespace {

Word word_from_json(const json& j, int rank) {
  if (!j.is_array()) throw InputError("measure: a word must be an array of signed indices");
  std::vector<int> idx;
  for (const json& x : j) {
    if (!x.is_number_integer()) throw InputError("measure: word letters must be integers");
    idx.push_back(x.get<int>());
  }
  return from_indices(idx, rank);
}

json word_to_json(const Word& w) { return to_indices(w); }

}  // namespace

FiniteMeasure measure_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("measure: expected a JSON object");
  for (const auto& [key, value] : doc.items())
    if (key != "kind" && key != "rank" && key != "atoms")
      throw InputError("measure: unknown key '" + key + "'");
  const std::string kind = doc.value("kind", std::string("single"));
  if (kind != "single" && kind != "pair") throw InputError("measure: kind must be single or pair");
  if (!doc.contains("rank") || !doc["rank"].is_number_integer())
    throw InputError("measure: integer 'rank' required");
  const int rank = doc["rank"].get<int>();
  if (!doc.contains("atoms") || !doc["atoms"].is_array())
    throw InputError("measure: 'atoms' array required");

  const bool pair = kind == "pair";
  std::vector<WordPair> words;
  std::vector<Rational> exact;
  std::vector<double> floats;
  bool any_number = false;
  for (const json& atom : doc["atoms"]) {
    if (!atom.is_object() || !atom.contains("word") || !atom.contains("weight"))
      throw InputError("measure: each atom needs 'word' and 'weight'");
    WordPair w{Word(rank), Word(rank)};
    if (pair) {
      const json& ws = atom["word"];
      if (!ws.is_array() || ws.size() != 2) throw InputError("measure: pair atoms need two words");
      w = {word_from_json(ws[0], rank), word_from_json(ws[1], rank)};
    } else {
      w.first = word_from_json(atom["word"], rank);
    }
    const json& weight = atom["weight"];
    if (weight.is_string()) {
      const Rational r = parse_rational(weight.get<std::string>());
      exact.push_back(r);
      floats.push_back(r.convert_to<double>());
    } else if (weight.is_number()) {
      any_number = true;
      const double x = weight.get<double>();
      if (!std::isfinite(x)) throw InputError("measure: weights must be finite");
      exact.push_back(decimal_rational(x));
      floats.push_back(x);
    } else {
      throw InputError("measure: weight must be a number or a string");
    }
    words.push_back(std::move(w));
  }

  Rational total = 0;
  for (const Rational& r : exact) total += r;
  const bool use_exact = !any_number || total == 1;
  if (pair) {
    if (use_exact) {
      std::vector<std::pair<WordPair, Rational>> s;
      for (std::size_t i = 0; i < words.size(); ++i) s.emplace_back(words[i], exact[i]);
      return FiniteMeasure::build_pair(rank, s);
    }
    std::vector<std::pair<WordPair, double>> s;
    for (std::size_t i = 0; i < words.size(); ++i) s.emplace_back(words[i], floats[i]);
    return FiniteMeasure::build_pair(rank, s);
  }
  if (use_exact) {
    std::vector<std::pair<Word, Rational>> s;
    for (std::size_t i = 0; i < words.size(); ++i) s.emplace_back(words[i].first, exact[i]);
    return FiniteMeasure::build(rank, s);
  }
  std::vector<std::pair<Word, double>> s;
  for (std::size_t i = 0; i < words.size(); ++i) s.emplace_back(words[i].first, floats[i]);
  return FiniteMeasure::build(rank, s);
}

json measure_to_json(const FiniteMeasure& m) {
  json atoms = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json atom;
    if (m.kind() == MeasureKind::pair)
      atom["word"] = json::array({word_to_json(m.first(i)), word_to_json(m.second(i))});
    else
      atom["word"] = word_to_json(m.first(i));
    if (m.is_exact()) {
      const Rational w = m.exact_weight(i);
      atom["weight"] = boost::multiprecision::denominator(w) == 1
                           ? boost::multiprecision::numerator(w).str()
                           : boost::multiprecision::numerator(w).str() + "/" +
                                 boost::multiprecision::denominator(w).str();
    } else {
      atom["weight"] = format_double(m.weight(i));
    }
    atoms.push_back(std::move(atom));
  }
  return {{"kind", std::string(to_string(m.kind()))}, {"rank", m.rank()}, {"atoms", atoms}};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_null()) return std::nan("");
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return std::stod(s);
}

}  // namespace

json to_json(const EstimateResult& r) {
  json j;
  j["rho"] = std::isnan(r.rho) ? json(nullptr) : json(r.rho);
  j["n"] = r.n;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["method"] = r.method;
  j["value"] = number(r.value);
  j["std_error"] = number(r.std_error);
  j["ci_low"] = number(r.ci_low);
  j["ci_high"] = number(r.ci_high);
  return j;
}

EstimateResult estimate_from_json(const json& j) {
  EstimateResult r;
  r.rho = read_number(j.at("rho"));
  r.n = j.at("n").get<int>();
  r.trials = j.at("trials").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.method = j.at("method").get<std::string>();
  r.value = read_number(j.at("value"));
  r.std_error = read_number(j.at("std_error"));
  r.ci_low = read_number(j.at("ci_low"));
  r.ci_high = read_number(j.at("ci_high"));
  return r;
}

std::string to_csv_row(const EstimateResult& r) {
  std::string s = std::isnan(r.rho) ? std::string() : format_double(r.rho);
  s += ',' + std::to_string(r.n) + ',' + std::to_string(r.trials) + ',' + std::to_string(r.seed) +
       ',' + r.method + ',' + format_double(r.value) + ',' + format_double(r.std_error) + ',' +
       format_double(r.ci_low) + ',' + format_double(r.ci_high);
  return s;
}

void write_csv(std::ostream& out, std::span<const EstimateResult> rows) {
  out << kCsvHeader << '\n';
  for (const EstimateResult& r : rows) out << to_csv_row(r) << '\n';
}

}  // namespace noisywalk
