#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "noisywalk/measure.hpp"
#include "noisywalk/stats.hpp"

namespace noisywalk {

/// Measure document:
///   {"kind": "single"|"pair", "rank": k,
///    "atoms": [{"word": [1,-2], "weight": "1/4"}, ...]}
/// Pair atoms carry "word": [[...], [...]].  Weights may be JSON numbers or
/// strings holding a decimal or a fraction; an all-string document is read
/// exactly.  Export writes exact weights as fractions when available.
FiniteMeasure measure_from_json(const nlohmann::json& doc);
nlohmann::json measure_to_json(const FiniteMeasure& m);

/// Shortest decimal string that round-trips; "nan"/"inf" for non-finite.
std::string format_double(double x);

nlohmann::json to_json(const EstimateResult& r);
EstimateResult estimate_from_json(const nlohmann::json& j);

inline constexpr std::string_view kCsvHeader =
    "rho,n,trials,seed,method,value,std_error,ci_low,ci_high";

/// One CSV line (no newline) in the kCsvHeader column order; an unset rho is
/// left empty.
std::string to_csv_row(const EstimateResult& r);
void write_csv(std::ostream& out, std::span<const EstimateResult> rows);

}  // namespace noisywalk
