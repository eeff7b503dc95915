#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "cli.hpp"
#include "noisywalk/errors.hpp"
#include "noisywalk/estimators.hpp"
#include "noisywalk/io.hpp"

namespace noisywalk::cli {

using nlohmann::json;

namespace {

constexpr std::size_t kDefaultCap = std::size_t{1} << 23;

[[noreturn]] void fail(const std::string& what) { throw ValidationError("config: " + what); }

const std::set<std::string>& allowed_keys(Subcommand c) {
  static const std::set<std::string> report{"spec_version", "out", "plot", "options"};
  static const std::set<std::string> drift{"spec_version", "group", "measure", "rho", "rho_grid",
                                           "seed", "trials", "workers", "out", "plot", "options",
                                           "n"};
  static const std::set<std::string> dimension{"spec_version", "group", "measure", "rho",
                                               "rho_grid", "seed", "trials", "workers", "out",
                                               "plot", "options", "horizon"};
  static const std::set<std::string> tv{"spec_version", "group", "measure", "rho", "rho_grid",
                                        "seed", "trials", "workers", "out", "plot", "options",
                                        "n", "cap"};
  static const std::set<std::string> convolving{"spec_version", "group", "measure", "rho",
                                                "rho_grid", "seed", "trials", "workers", "out",
                                                "plot", "options", "n", "n_max", "cap"};
  switch (c) {
    case Subcommand::report: return report;
    case Subcommand::drift: return drift;
    case Subcommand::dimension: return dimension;
    case Subcommand::tv: return tv;
    case Subcommand::entropy:
    case Subcommand::sweep: return convolving;
  }
  return report;
}

// Defaults for each option; a null default marks an optional option.
json option_defaults(Subcommand c, const RunConfig& cfg) {
  switch (c) {
    case Subcommand::drift: return json::object();
    case Subcommand::entropy: return {{"method", "auto"}, {"truncate", false}};
    case Subcommand::tv: return {{"method", "auto"}, {"c", 0.2}};
    case Subcommand::dimension:
      return {{"t_max", cfg.horizon / 4}, {"centers", 1000}, {"rho_prime", nullptr}};
    case Subcommand::sweep:
      return {{"entropy_n", cfg.n},         {"entropy_trials", cfg.trials},
              {"drift_n", cfg.n},           {"drift_trials", cfg.trials},
              {"tv_n", json::array({1, 2, 3, 4})}, {"margin", nullptr}};
    case Subcommand::report: return {{"input", (cfg.out / "results.json").string()}};
  }
  return json::object();
}

std::int64_t integer(const json& doc, const std::string& key, std::int64_t fallback,
                     std::int64_t lo, std::int64_t hi = std::numeric_limits<int>::max()) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi))
    fail("'" + key + "' is too large");
  const std::int64_t x = v.get<std::int64_t>();
  if (x < lo || x > hi) fail("'" + key + "' out of range");
  return x;
}

double rho_value(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + " must be a number");
  const double r = v.get<double>();
  if (!(r >= 0.0 && r <= 1.0)) fail(where + " must lie in [0, 1], got " + format_double(r));
  return r;
}

std::vector<double> rho_grid(const json& doc) {
  const bool has_rho = doc.contains("rho"), has_grid = doc.contains("rho_grid");
  if (has_rho && has_grid) fail("give either 'rho' or 'rho_grid', not both");
  if (!has_rho && !has_grid) fail("'rho' or 'rho_grid' is required");
  if (has_rho) return {rho_value(doc.at("rho"), "'rho'")};
  const json& g = doc.at("rho_grid");
  std::vector<double> grid;
  if (g.is_string()) {
    try {
      grid = parse_rho_grid(g.get<std::string>());
    } catch (const InputError& e) {
      fail(e.what());
    }
  } else if (g.is_array()) {
    for (const json& v : g) grid.push_back(rho_value(v, "'rho_grid' entry"));
  } else {
    fail("'rho_grid' must be \"a:b:step\" or an array of numbers");
  }
  if (grid.empty()) fail("'rho_grid' is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) fail("'rho_grid' must be strictly increasing");
  return grid;
}

void resolve_measure(const json& doc, RunConfig& cfg) {
  const json measure = doc.value("measure", json("uniform"));
  std::optional<GroupSpec> group;
  if (doc.contains("group")) {
    if (!doc.at("group").is_string()) fail("'group' must be a string such as free_group:2");
    try {
      group = parse_group(doc.at("group").get<std::string>());
    } catch (const InputError& e) {
      fail(e.what());
    }
  }
  if (measure.is_string()) {
    if (measure.get<std::string>() != "uniform") fail("'measure' must be \"uniform\" or a measure object");
    if (!group) fail("'group' is required with the uniform measure");
    cfg.group = *group;
    cfg.measure = group->semigroup ? free_semigroup_uniform(group->rank) : free_group_srw(group->rank);
    return;
  }
  if (!measure.is_object()) fail("'measure' must be \"uniform\" or a measure object");
  FiniteMeasure mu = measure_from_json(measure);
  if (mu.kind() != MeasureKind::single) fail("'measure' must be a single (not pair) measure");
  if (group) {
    if (group->rank != mu.rank())
      fail("group rank " + std::to_string(group->rank) + " conflicts with measure rank " +
           std::to_string(mu.rank()));
    if (group->semigroup && !mu.is_positive())
      fail("a free semigroup measure cannot use inverse letters");
    cfg.group = *group;
  } else {
    cfg.group = GroupSpec{false, mu.rank()};
  }
  cfg.measure = std::move(mu);
}

void resolve_options(const json& doc, RunConfig& cfg) {
  const json defaults = option_defaults(cfg.command, cfg);
  const json given = doc.value("options", json::object());
  if (!given.is_object()) fail("'options' must be an object");
  json opts = defaults;
  for (const auto& [key, value] : given.items()) {
    if (!defaults.contains(key))
      fail("unknown option '" + key + "' for " + std::string(to_string(cfg.command)));
    opts[key] = value;
  }
  auto positive = [&](const char* key, std::int64_t hi = std::numeric_limits<int>::max()) {
    integer(opts, key, 0, 1, hi);
  };
  switch (cfg.command) {
    case Subcommand::entropy: {
      const json& m = opts["method"];
      if (!m.is_string() || (m != "auto" && m != "pointwise" && m != "exact"))
        fail("options.method must be auto, pointwise or exact");
      if (!opts["truncate"].is_boolean()) fail("options.truncate must be a boolean");
      break;
    }
    case Subcommand::tv: {
      const json& m = opts["method"];
      if (!m.is_string() || (m != "auto" && m != "exact" && m != "mc"))
        fail("options.method must be auto, exact or mc");
      if (!opts["c"].is_number() || !(opts["c"].get<double>() > 0.0))
        fail("options.c must be a positive number");
      break;
    }
    case Subcommand::dimension:
      positive("t_max", cfg.horizon);
      if (opts["t_max"].get<int>() < 2) fail("options.t_max must be at least 2");
      integer(opts, "centers", 0, 1, std::numeric_limits<std::int64_t>::max());
      if (!opts["rho_prime"].is_null()) {
        rho_value(opts["rho_prime"], "options.rho_prime");
        if (cfg.rho_grid.size() != 1) fail("options.rho_prime needs a single 'rho'");
      }
      break;
    case Subcommand::sweep:
      positive("entropy_n");
      positive("drift_n");
      integer(opts, "entropy_trials", 0, 2, std::numeric_limits<std::int64_t>::max());
      integer(opts, "drift_trials", 0, 2, std::numeric_limits<std::int64_t>::max());
      if (!opts["tv_n"].is_array()) fail("options.tv_n must be an array of positive integers");
      for (const json& v : opts["tv_n"])
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > 64)
          fail("options.tv_n must hold integers in [1, 64]");
      if (!opts["margin"].is_null() &&
          (!opts["margin"].is_number() || opts["margin"].get<double>() < 0.0))
        fail("options.margin must be a non-negative number");
      break;
    case Subcommand::report:
      if (!opts["input"].is_string()) fail("options.input must be a path");
      break;
    case Subcommand::drift: break;
  }
  cfg.options = std::move(opts);
}

}  // namespace

std::optional<Subcommand> parse_subcommand(std::string_view name) {
  for (Subcommand c : {Subcommand::drift, Subcommand::entropy, Subcommand::tv,
                       Subcommand::dimension, Subcommand::sweep, Subcommand::report})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::string_view to_string(Subcommand c) noexcept {
  switch (c) {
    case Subcommand::drift: return "drift";
    case Subcommand::entropy: return "entropy";
    case Subcommand::tv: return "tv";
    case Subcommand::dimension: return "dimension";
    case Subcommand::sweep: return "sweep";
    case Subcommand::report: return "report";
  }
  return "?";
}

GroupSpec parse_group(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InputError("group must look like free_group:2");
  const std::string_view kind = text.substr(0, colon), num = text.substr(colon + 1);
  GroupSpec g;
  if (kind == "free_group") {
    g.semigroup = false;
  } else if (kind == "free_semigroup") {
    g.semigroup = true;
  } else {
    throw InputError("unknown group '" + std::string(kind) + "'");
  }
  const auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), g.rank);
  if (ec != std::errc() || end != num.data() + num.size())
    throw InputError("group rank must be an integer");
  if (g.rank < 2 || g.rank > 127) throw InputError("group rank must lie in [2, 127]");
  return g;
}

std::string to_string(const GroupSpec& g) {
  return std::string(g.semigroup ? "free_semigroup:" : "free_group:") + std::to_string(g.rank);
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

json apply_flags(json doc, Subcommand command, const Flags& flags) {
  if (!doc.is_object()) fail("the config must be a JSON object");
  if (flags.seed) doc["seed"] = *flags.seed;
  if (flags.trials) doc["trials"] = *flags.trials;
  if (flags.rho) {
    doc.erase("rho_grid");
    doc["rho"] = *flags.rho;
  }
  if (flags.rho_grid) {
    doc.erase("rho");
    doc["rho_grid"] = *flags.rho_grid;
  }
  if (flags.n) doc[command == Subcommand::dimension ? "horizon" : "n"] = *flags.n;
  if (flags.group) doc["group"] = *flags.group;
  if (flags.out) doc["out"] = *flags.out;
  if (flags.workers) doc["workers"] = *flags.workers;
  if (flags.plot) doc["plot"] = true;
  return doc;
}

RunConfig parse_config(Subcommand command, const json& doc) {
  if (!doc.is_object()) fail("the config must be a JSON object");
  const auto& allowed = allowed_keys(command);
  for (const auto& [key, value] : doc.items())
    if (!allowed.count(key))
      fail("unknown key '" + key + "' for " + std::string(to_string(command)));

  RunConfig cfg;
  cfg.command = command;
  if (doc.contains("spec_version") && doc.at("spec_version") != kSpecVersion)
    fail("unsupported spec_version (expected " + std::to_string(kSpecVersion) + ")");
  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) fail("'out' must be a path");
    cfg.out = doc.at("out").get<std::string>();
  }
  if (doc.contains("plot")) {
    if (!doc.at("plot").is_boolean()) fail("'plot' must be a boolean");
    cfg.plot = doc.at("plot").get<bool>();
  }

  if (command != Subcommand::report) {
    if (!doc.contains("seed")) fail("'seed' is required");
    const json& seed = doc.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
      fail("'seed' must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    resolve_measure(doc, cfg);
    cfg.rho_grid = rho_grid(doc);

    std::int64_t default_trials = 200, default_n = 1000;
    if (command == Subcommand::entropy) default_n = 2000;
    if (command == Subcommand::tv) default_trials = 100000, default_n = 6;
    if (command == Subcommand::dimension) default_trials = 20000;
    if (command == Subcommand::sweep) default_n = 500;
    cfg.trials = integer(doc, "trials", default_trials, 2, std::numeric_limits<std::int64_t>::max());
    cfg.n = static_cast<int>(integer(doc, "n", default_n, 1));
    cfg.n_max = static_cast<int>(integer(doc, "n_max", 6, 1, 64));
    cfg.horizon = static_cast<int>(integer(doc, "horizon", 400, 2, 1 << 20));
    cfg.cap = static_cast<std::size_t>(
        integer(doc, "cap", static_cast<std::int64_t>(kDefaultCap), 1,
                std::numeric_limits<std::int64_t>::max()));
    cfg.workers = static_cast<unsigned>(integer(doc, "workers", 0, 0, 4096));
  }
  resolve_options(doc, cfg);

  json& r = cfg.resolved;
  r["subcommand"] = to_string(command);
  r["spec_version"] = kSpecVersion;
  r["out"] = cfg.out.string();
  r["plot"] = cfg.plot;
  r["options"] = cfg.options;
  if (command != Subcommand::report) {
    r["group"] = to_string(cfg.group);
    r["measure"] = doc.value("measure", json("uniform"));
    r["rho_grid"] = cfg.rho_grid;
    r["seed"] = cfg.seed;
    r["trials"] = cfg.trials;
    r["workers"] = cfg.workers;
    if (allowed.count("n")) r["n"] = cfg.n;
    if (allowed.count("n_max")) r["n_max"] = cfg.n_max;
    if (allowed.count("horizon")) r["horizon"] = cfg.horizon;
    if (allowed.count("cap")) r["cap"] = cfg.cap;
  }
  return cfg;
}

}  // namespace noisywalk::cli
