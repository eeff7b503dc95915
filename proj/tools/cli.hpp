#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "noisywalk/measure.hpp"
#include "noisywalk/stats.hpp"

namespace noisywalk::cli {

inline constexpr int kSpecVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Subcommand { drift, entropy, tv, dimension, sweep, report };

std::optional<Subcommand> parse_subcommand(std::string_view name);
std::string_view to_string(Subcommand c) noexcept;

struct GroupSpec {
  bool semigroup = false;
  int rank = 2;
};

/// "free_group:k" or "free_semigroup:m".
GroupSpec parse_group(std::string_view text);
std::string to_string(const GroupSpec& g);

/// A validated run.  `options` holds the subcommand options with defaults
/// filled in; `resolved` is the full config as it will be echoed.
struct RunConfig {
  Subcommand command = Subcommand::drift;
  GroupSpec group;
  std::optional<FiniteMeasure> measure;
  std::vector<double> rho_grid;
  int n = 0;
  int n_max = 0;
  int horizon = 0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t cap = 0;
  unsigned workers = 0;
  std::filesystem::path out = ".";
  bool plot = false;
  nlohmann::json options = nlohmann::json::object();
  nlohmann::json resolved = nlohmann::json::object();
};

/// Command-line overrides.  Unset fields leave the file value alone.
struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<double> rho;
  std::optional<std::string> rho_grid;
  std::optional<int> n;
  std::optional<std::string> group;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  bool plot = false;
};

nlohmann::json load_config_file(const std::filesystem::path& path);

/// Writes flag values into the document.  --rho replaces a file rho_grid and
/// vice versa; --n sets the horizon for `dimension`.
nlohmann::json apply_flags(nlohmann::json doc, Subcommand command, const Flags& flags);

/// Validates the document against the subcommand schema.  Unknown keys, a
/// missing seed, ρ outside [0, 1] and group/measure rank conflicts raise
/// ValidationError.
RunConfig parse_config(Subcommand command, const nlohmann::json& doc);

struct Record {
  EstimateResult estimate;
  nlohmann::json detail;  // null when there is nothing beyond the estimate
};

struct Report {
  Subcommand command = Subcommand::drift;
  std::vector<Record> records;
};

/// Runs the subcommand.  Subcommands run sequentially; trials inside an
/// estimator may use `workers` threads.
Report execute(const RunConfig& config, std::ostream& log);

/// results.json (one record per line), table.csv and, when `plot` is set,
/// plot.svg under `dir`.  Throws InputError on an empty report and
/// OutputError when the directory cannot be written.
void write_report(const Report& report, const std::filesystem::path& dir, bool plot);

/// Timestamped sidecar next to the report; the only non-reproducible file.
void write_metadata(const RunConfig& config, const std::filesystem::path& dir,
                    std::span<const std::string> argv);

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// Self-contained line chart.
std::string render_svg(std::span<const Series> series, std::string_view title,
                       std::string_view x_label, std::string_view y_label);

/// Series drawn for a report: sweep plots h against ρ with the closed form
/// dashed, tv plots distance against n, anything else plots each method
/// against ρ when it varies and against n otherwise.
std::vector<Series> plot_series(const Report& report, std::string& x_label, std::string& y_label);

/// Full command line.  Returns the process exit status: 0 success, 2
/// validation or output error, 3 compute budget exceeded.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace noisywalk::cli
