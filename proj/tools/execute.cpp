#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "noisywalk/boundary.hpp"
#include "noisywalk/errors.hpp"
#include "noisywalk/estimators.hpp"
#include "noisywalk/io.hpp"
#include "noisywalk/oracle.hpp"

namespace noisywalk::cli {

using nlohmann::json;

namespace {

EstimateResult exact_value(double value, int n, std::string method, double rho,
                           std::uint64_t seed) {
  EstimateResult r;
  r.value = value;
  r.ci_low = r.ci_high = value;
  r.n = n;
  r.trials = 1;
  r.seed = seed;
  r.method = std::move(method);
  r.rho = rho;
  return r;
}

EstimateResult at_rho(EstimateResult r, double rho, std::int64_t trials) {
  r.rho = rho;
  r.trials = trials;
  return r;
}

void add(Report& report, EstimateResult r, json detail = nullptr) {
  report.records.push_back({std::move(r), std::move(detail)});
}

void run_drift(const RunConfig& c, Report& report) {
  for (double rho : c.rho_grid) {
    const DriftEstimate d = drift_mc(build_pi_rho(*c.measure, rho), c.n, c.trials, c.seed, c.workers);
    add(report, at_rho(d.combined, rho, c.trials));
    add(report, at_rho(d.first, rho, c.trials));
    add(report, at_rho(d.second, rho, c.trials));
  }
}

void run_entropy(const RunConfig& c, Report& report, std::ostream& log) {
  const auto alphabet = semigroup_alphabet(*c.measure);
  std::string method = c.options["method"].get<std::string>();
  if (method == "auto") method = alphabet ? "pointwise" : "exact";
  for (double rho : c.rho_grid) {
    if (method == "pointwise") {
      add(report, shannon_pointwise(*c.measure, rho, c.n, c.trials, c.seed, c.workers));
    } else {
      ConvolutionOptions options;
      options.cap = c.cap;
      if (c.options["truncate"].get<bool>()) options.on_overflow = OverflowPolicy::truncate;
      const EntropyCurve curve = entropy_exact_curve(build_pi_rho(*c.measure, rho), c.n_max, options);
      for (int k = 1; k <= c.n_max; ++k) {
        const Truncation& t = curve.truncation[static_cast<std::size_t>(k - 1)];
        EstimateResult r = exact_value(curve.values[static_cast<std::size_t>(k - 1)], k,
                                       "entropy_level", rho, c.seed);
        json detail = nullptr;
        if (t.truncated) {
          r.ci_low = t.entropy_low;
          r.ci_high = t.entropy_high;
          detail = {{"truncated", true}, {"lost_mass", t.lost_mass}};
        }
        add(report, r, detail);
      }
      try {
        const RateBracket b = entropy_rate_estimate(curve);
        EstimateResult inc = exact_value(b.h_increment, b.n_used, "entropy_increment", rho, c.seed);
        inc.ci_high = b.h_upper;
        inc.std_error = 0.5 * (b.h_upper - b.h_increment);
        add(report, inc);
        add(report, exact_value(b.h_upper, b.n_used, "entropy_upper", rho, c.seed));
      } catch (const InputError& e) {
        log << "warning: rho=" << format_double(rho) << ": no rate bracket (" << e.what() << ")\n";
      }
    }
    if (alphabet)
      add(report, exact_value(h_semigroup({*alphabet, rho}), c.n, "h_closed_form", rho, c.seed));
  }
}

void run_tv(const RunConfig& c, Report& report) {
  const auto alphabet = semigroup_alphabet(*c.measure);
  const std::string method = c.options["method"].get<std::string>();
  for (double rho : c.rho_grid) {
    if (method == "mc") {
      const double cc = c.options["c"].get<double>();
      const TvLowerBound b = tv_lower_bound_mc(*c.measure, rho, c.n, cc, c.trials, c.seed, c.workers);
      add(report, b.bound,
          {{"p_coupled", b.p_coupled}, {"p_independent", b.p_independent},
           {"threshold", b.threshold}, {"c", cc}});
      continue;
    }
    for (int k = 1; k <= c.n; ++k) {
      add(report, exact_value(tv_exact(*c.measure, rho, k, c.cap), k, "tv_exact", rho, c.seed));
      if (alphabet)
        add(report, exact_value(tv_semigroup({*alphabet, rho}, k), k, "tv_closed_form", rho, c.seed));
    }
  }
}

json dimension_detail(const LocalDimension& d) {
  return {{"centers_used", d.centers_used},
          {"centers_skipped", d.centers_skipped},
          {"dropped_points", d.dropped_points}};
}

EstimateResult dimension_row(const LocalDimension& d, double rho, const char* method) {
  EstimateResult r = d.slope;
  r.rho = rho;
  r.method = method;
  return r;
}

void run_dimension(const RunConfig& c, Report& report) {
  const auto alphabet = semigroup_alphabet(*c.measure);
  const int t_max = c.options["t_max"].get<int>();
  const std::int64_t centers = c.options["centers"].get<std::int64_t>();
  std::vector<int> grid;
  for (int t = 1; t <= t_max; ++t) grid.push_back(t);

  if (!c.options["rho_prime"].is_null()) {
    const double rho = c.rho_grid.front(), rho_prime = c.options["rho_prime"].get<double>();
    SingularityParams p;
    p.horizon = c.horizon;
    p.samples = c.trials;
    p.t_grid = grid;
    p.centers = centers;
    p.seed = c.seed;
    p.workers = c.workers;
    const SingularityReport s = dimension_singularity_check(*c.measure, rho, rho_prime, p);
    add(report, dimension_row(s.dim_a, rho, "local_dimension"), dimension_detail(s.dim_a));
    add(report, dimension_row(s.dim_b, rho_prime, "local_dimension"), dimension_detail(s.dim_b));
    add(report, dimension_row(s.dim_cross, rho_prime, "local_dimension_cross"),
        dimension_detail(s.dim_cross));
    EstimateResult gap = s.dim_a.slope;
    gap.value = s.gap;
    gap.std_error = s.gap_std_error;
    gap.ci_low = s.gap_ci.low;
    gap.ci_high = s.gap_ci.high;
    gap.rho = rho;
    gap.method = "dimension_gap";
    add(report, gap, {{"rho_prime", rho_prime}, {"conclusive", s.conclusive}});
    return;
  }
  for (double rho : c.rho_grid) {
    const auto samples = sample_boundary(*c.measure, rho, c.horizon, c.trials, c.seed, c.workers);
    const CylinderTree tree(samples, t_max);
    const LocalDimension d = local_dimension(samples, tree, grid, centers, c.seed);
    json detail = dimension_detail(d);
    detail["samples"] = c.trials;
    add(report, dimension_row(d, rho, "local_dimension"), detail);
    if (alphabet)
      add(report, exact_value(h_semigroup({*alphabet, rho}), t_max, "h_closed_form", rho, c.seed));
  }
}

void run_sweep(const RunConfig& c, Report& report, std::ostream& log) {
  SweepParams p;
  p.seed = c.seed;
  p.entropy_n = c.options["entropy_n"].get<int>();
  p.entropy_trials = c.options["entropy_trials"].get<std::int64_t>();
  p.entropy_n_max = c.n_max;
  p.cap = c.cap;
  p.drift_n = c.options["drift_n"].get<int>();
  p.drift_trials = c.options["drift_trials"].get<std::int64_t>();
  p.tv_n = c.options["tv_n"].get<std::vector<int>>();
  p.workers = c.workers;
  const SweepTable table = rho_sweep(*c.measure, c.rho_grid, p);
  for (const SweepRow& row : table.rows) {
    add(report, at_rho(row.entropy, row.rho, row.entropy.trials));
    if (row.entropy_closed_form)
      add(report, exact_value(*row.entropy_closed_form, p.entropy_n, "h_closed_form", row.rho, c.seed));
    add(report, at_rho(row.drift, row.rho, p.drift_trials));
    for (const auto& [n, tv] : row.tv) add(report, exact_value(tv, n, "tv_exact", row.rho, c.seed));
  }
  if (table.rows.size() < 2 || table.rows.back().rho != 1.0) {
    log << "note: rho_star needs a grid ending at rho = 1 with at least two points\n";
    return;
  }
  std::optional<double> margin;
  if (!c.options["margin"].is_null()) margin = c.options["margin"].get<double>();
  const RhoStar star = rho_star_estimate(table, margin);
  EstimateResult r = exact_value(star.rho_star, p.entropy_n, "rho_star",
                                 std::numeric_limits<double>::quiet_NaN(), c.seed);
  r.trials = table.rows.front().entropy.trials;
  json detail = {{"margin", star.margin}, {"warning", star.warning}};
  if (star.warning) {
    detail["message"] = star.message;
    log << "warning: " << star.message << '\n';
  }
  add(report, r, detail);
}

void run_report(const RunConfig& c, Report& report) {
  const std::string path = c.options["input"].get<std::string>();
  std::ifstream in(path);
  if (!in) throw ValidationError("report: cannot read '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      add(report, estimate_from_json(j), j.value("detail", json(nullptr)));
    } catch (const json::exception& e) {
      throw ValidationError("report: " + path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

Report execute(const RunConfig& config, std::ostream& log) {
  Report report;
  report.command = config.command;
  switch (config.command) {
    case Subcommand::drift: run_drift(config, report); break;
    case Subcommand::entropy: run_entropy(config, report, log); break;
    case Subcommand::tv: run_tv(config, report); break;
    case Subcommand::dimension: run_dimension(config, report); break;
    case Subcommand::sweep: run_sweep(config, report, log); break;
    case Subcommand::report: run_report(config, report); break;
  }
  return report;
}

}  // namespace noisywalk::cli
