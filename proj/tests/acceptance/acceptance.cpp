// One line per acceptance criterion; exit status 1 when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "noisywalk/boundary.hpp"
#include "noisywalk/convolution.hpp"
#include "noisywalk/estimators.hpp"
#include "noisywalk/oracle.hpp"

using namespace noisywalk;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240917;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail.clear();
      else detail += "; ";
      detail += what;
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome semigroup_entropy_formula() {
  Outcome o;
  double worst = 0.0, slowest = 0.0;
  for (int m : {2, 3}) {
    const double lm = std::log(static_cast<double>(m));
    o.require(h_semigroup({m, 0.0}) == lm, "h(pi^0) != log m for m=" + std::to_string(m));
    o.require(h_semigroup({m, 1.0}) == 2.0 * lm, "h(pi^1) != 2 log m for m=" + std::to_string(m));
    for (double rho : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto t0 = Clock::now();
      const EstimateResult e = shannon_pointwise(m, rho, 10000, 200, kSeed);
      const double secs = seconds_since(t0);
      const double h = h_semigroup({m, rho});
      const double rel = std::abs(e.value - h) / h;
      worst = std::max(worst, rel);
      slowest = std::max(slowest, secs);
      const std::string cell = "m=" + std::to_string(m) + " rho=" + fmt("%g", rho);
      o.require(rel < 0.01, cell + fmt(": relative error %.4f", rel));
      o.require(secs < 10.0, cell + fmt(": %.1f s", secs));
      if (rho == 0.0 || rho == 1.0)
        o.require(e.ci_low <= h && h <= e.ci_high, cell + ": endpoint outside the CI");
    }
  }
  if (o.pass) o.detail = fmt("max relative error %.2e, slowest cell %.2f s", worst, slowest);
  return o;
}

Outcome entropy_sandwich() {
  Outcome o;
  const auto t0 = Clock::now();
  const FiniteMeasure mu = free_group_srw(2);
  int checked = 0;
  for (double rho : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const FiniteMeasure pi = build_pi_rho(mu, rho);
    const FiniteMeasure* steps[] = {&mu, &pi};
    ConvolutionOptions options;
    options.arithmetic = Arithmetic::exact;
    const auto powers = convolve_powers_shared(steps, 6, options);
    for (int n = 1; n <= 6; ++n) {
      const auto& mu_n = powers[0][static_cast<std::size_t>(n - 1)];
      const auto& pi_n = powers[1][static_cast<std::size_t>(n - 1)];
      const EntropyGaps g = entropy_gaps(mu_n, pi_n);
      const std::string cell = "rho=" + fmt("%g", rho) + " n=" + std::to_string(n);
      o.require(g.exact_inputs, cell + ": inexact convolution");
      o.require(g.lower_certified(), cell + ": H(mu_n) <= H(pi_n) not certified");
      o.require(g.upper_certified(), cell + ": H(pi_n) <= 2H(mu_n) not certified");
      if (rho == 0.0) o.require(g.lower_exact_zero, cell + ": rho=0 should give H(pi_n) = H(mu_n)");
      if (rho == 1.0) o.require(g.upper_exact_zero, cell + ": rho=1 should give H(pi_n) = 2H(mu_n)");
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, fmt("runtime %.1f s", secs));
  if (o.pass) o.detail = std::to_string(checked) + " cells certified, " + fmt("%.1f s", secs);
  return o;
}

Outcome tv_oracle_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int m : {2, 3}) {
    const FiniteMeasure mu = free_semigroup_uniform(m);
    for (int i = 0; i <= 10; ++i)
      for (int n = 1; n <= 10; ++n) {
        const double rho = i / 10.0;
        const double diff = std::abs(tv_exact(mu, rho, n) - tv_semigroup({m, rho}, n));
        worst = std::max(worst, diff);
        if (diff > 1e-12)
          o.require(false, "m=" + std::to_string(m) + " rho=" + fmt("%g", rho) +
                               " n=" + std::to_string(n) + fmt(": |diff| = %.2e", diff));
      }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, fmt("runtime %.1f s", secs));
  if (o.pass) o.detail = fmt("max |tv_exact - tv_semigroup| = %.2e over 220 cells, %.2f s", worst, secs);
  return o;
}

Outcome tv_endpoints() {
  Outcome o;
  int zeros = 0;
  for (int m : {2, 3}) {
    const FiniteMeasure mu = free_semigroup_uniform(m);
    for (int n = 1; n <= 10; ++n, ++zeros)
      o.require(tv_exact(mu, 1.0, n) == 0.0, "semigroup m=" + std::to_string(m) + " n=" + std::to_string(n));
  }
  for (int n = 1; n <= 5; ++n, ++zeros)
    o.require(tv_exact(free_group_srw(2), 1.0, n) == 0.0, "F_2 n=" + std::to_string(n));

  // ρ = 0, n = 1: enumerate the m² pairs
  for (int m : {2, 3, 4}) {
    const FiniteMeasure mu = free_semigroup_uniform(m);
    Rational half_l1 = 0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const Rational coupled = a == b ? Rational(1, m) : Rational(0);
        const Rational product(1, m * m);
        half_l1 += coupled > product ? coupled - product : product - coupled;
      }
    half_l1 /= 2;
    o.require(half_l1 == Rational(m - 1, m), "enumeration disagrees with 1 - 1/m");
    o.require(tv_exact(mu, 0.0, 1) == half_l1.convert_to<double>(),
              "tv(rho=0, n=1) != 1 - 1/m for m=" + std::to_string(m));
  }
  if (o.pass) o.detail = std::to_string(zeros) + " exact zeros at rho=1; 1 - 1/m for m = 2, 3, 4";
  return o;
}

Outcome tv_trend_semigroup() {
  Outcome o;
  const auto t0 = Clock::now();
  double prev = 0.0;
  int crossing = 0;
  for (int n = 1; n <= 200; ++n) {
    const double tv = tv_semigroup({2, 0.1}, n);
    if (tv < prev) o.require(false, "decrease at n=" + std::to_string(n));
    if (crossing == 0 && tv > 0.99) crossing = n;
    prev = tv;
  }
  const double secs = seconds_since(t0);
  o.require(crossing > 0, "never exceeds 0.99 for n <= 200");
  o.require(secs < 1.0, fmt("runtime %.3f s", secs));
  if (o.pass)
    o.detail = "nondecreasing; first n with TV > 0.99 is " + std::to_string(crossing) +
               fmt(" (TV = %.6f); %.3f s", tv_semigroup({2, 0.1}, crossing), secs);
  return o;
}

Outcome tv_trend_free_group() {
  Outcome o;
  const auto t0 = Clock::now();
  const FiniteMeasure srw = free_group_srw(2);
  std::string values;
  for (int n = 1; n <= 6; ++n) {
    const double tv = tv_exact(srw, 0.9, n);
    o.require(tv > 0.0, "tv_exact = 0 at n=" + std::to_string(n));
    values += (n > 1 ? " " : "") + fmt("%.4f", tv);
  }
  const TvLowerBound b = tv_lower_bound_mc(srw, 0.9, 50, 0.02, 100000, kSeed);
  o.require(b.bound.value > 0.0, "Monte Carlo bound is not positive");
  o.require(b.bound.ci_low > 0.0, fmt("95%% CI reaches 0 (low = %.2e)", b.bound.ci_low));
  const double secs = seconds_since(t0);
  o.require(secs < 120.0, fmt("runtime %.1f s", secs));
  if (o.pass)
    o.detail = "tv_exact n=1..6: " + values +
               fmt("; MC bound %.4f, CI [%.4f, %.4f]", b.bound.value, b.bound.ci_low, b.bound.ci_high) +
               fmt(" with c=0.02; %.1f s", secs);
  return o;
}

Outcome drift() {
  Outcome o;
  const auto t0 = Clock::now();
  for (int m : {2, 3})
    for (double rho : {0.0, 0.5, 1.0}) {
      const DriftEstimate d = drift_mc(build_pi_rho(free_semigroup_uniform(m), rho), 500, 200, kSeed);
      o.require(d.combined.value == 1.0 && d.combined.std_error == 0.0,
                "semigroup m=" + std::to_string(m) + " rho=" + fmt("%g", rho) + " drift is not exactly 1");
    }
  const FiniteMeasure srw = free_group_srw(2);
  const DriftEstimate base = drift_mc(srw, 10000, 1000, kSeed);
  o.require(base.combined.ci_low <= 0.5 && 0.5 <= base.combined.ci_high,
            fmt("F_2 drift CI [%.5f, %.5f] misses 0.5", base.combined.ci_low, base.combined.ci_high));
  for (double rho : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const DriftEstimate d = drift_mc(build_pi_rho(srw, rho), 10000, 1000, kSeed);
    const bool overlap = d.first.ci_low <= d.second.ci_high && d.second.ci_low <= d.first.ci_high;
    o.require(overlap, "coordinate CIs disjoint at rho=" + fmt("%g", rho));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 120.0, fmt("runtime %.1f s", secs));
  if (o.pass)
    o.detail = fmt("F_2 drift %.5f, CI [%.5f, %.5f]", base.combined.value, base.combined.ci_low,
                   base.combined.ci_high) +
               fmt("; coordinates overlap on the 0.25 grid; %.1f s", secs);
  return o;
}

Outcome exact_dimension() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<int> grid;
  for (int t = 1; t <= 100; ++t) grid.push_back(t);
  std::string detail;
  for (double rho : {0.5, 1.0}) {
    const auto samples = sample_boundary(free_semigroup_uniform(2), rho, 400, 100000, kSeed);
    const CylinderTree tree(samples, 100);
    const LocalDimension d = local_dimension(samples, tree, grid, 1000, kSeed);
    const double h = h_semigroup({2, rho});
    const double rel = std::abs(d.slope.value - h) / h;
    o.require(rel < 0.05, fmt("rho=%g: slope %.4f vs %.4f", rho, d.slope.value, h));
    detail += (detail.empty() ? "" : "; ") + fmt("rho=%g slope %.4f", rho, d.slope.value) +
              fmt(" (target %.4f, rel %.3f)", h, rel);
  }
  const double secs = seconds_since(t0);
  o.require(secs < 300.0, fmt("runtime %.1f s", secs));
  if (o.pass) o.detail = detail + fmt("; %.1f s", secs);
  return o;
}

Outcome continuity() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<double> grid = parse_rho_grid("0:1:0.05");
  SweepParams p;
  p.seed = kSeed;
  p.entropy_n = 10000;
  p.entropy_trials = 200;
  p.drift_n = 10;
  p.drift_trials = 2;
  const SweepTable table = rho_sweep(free_semigroup_uniform(2), grid, p);
  double tightest = INFINITY;
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const SweepRow& a = table.rows[i];
    const SweepRow& b = table.rows[i + 1];
    const double step = b.rho - a.rho;
    // h' decreases in ρ, so its sup over the step sits at the left end
    const double slope = h_semigroup_derivative({2, a.rho});
    const double pooled = std::hypot(a.entropy.std_error, b.entropy.std_error);
    const double bound = slope * step + 3.0 * pooled;
    const double diff = std::abs(b.entropy.value - a.entropy.value);
    if (std::isfinite(bound)) tightest = std::min(tightest, bound - diff);
    o.require(diff <= bound, fmt("rho %.2f -> %.2f: |dh| = %.4f", a.rho, b.rho, diff) +
                                 fmt(" > bound %.4f", bound));
  }
  if (o.pass)
    o.detail = std::to_string(table.rows.size() - 1) + " steps within bound, smallest slack " +
               fmt("%.4f; %.1f s", tightest, seconds_since(t0));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("noisywalk_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs{
      {"sweep", "--group", "free_semigroup:2", "--rho-grid", "0:1:0.25", "--n", "2000", "--trials", "200"},
      {"drift", "--group", "free_group:2", "--rho-grid", "0:1:0.25", "--n", "1000", "--trials", "500"},
      {"dimension", "--group", "free_semigroup:2", "--rho", "0.5", "--n", "60", "--trials", "5000"}};
  int compared = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::vector<std::string> tables;
    for (const char* workers : {"1", "8", "8"}) {
      const fs::path dir = root / (std::to_string(r) + "_" + workers + "_" + std::to_string(tables.size()));
      std::vector<std::string> args{"noisywalk-cli"};
      args.insert(args.end(), runs[r].begin(), runs[r].end());
      args.insert(args.end(), {"--seed", std::to_string(kSeed), "--workers", workers, "--out", dir.string()});
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream sink;
      const int status = cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink);
      o.require(status == 0, runs[r][0] + " exited with " + std::to_string(status));
      tables.push_back(slurp(dir / "table.csv"));
    }
    o.require(!tables[0].empty(), runs[r][0] + ": empty table");
    o.require(tables[0] == tables[1], runs[r][0] + ": workers 1 and 8 differ");
    o.require(tables[1] == tables[2], runs[r][0] + ": rerun differs");
    ++compared;
  }
  fs::remove_all(root);
  if (o.pass) o.detail = std::to_string(compared) + " subcommands byte-identical across workers 1, 8 and a rerun";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"semigroup entropy formula", semigroup_entropy_formula},
      {"entropy sandwich", entropy_sandwich},
      {"tv oracle equivalence", tv_oracle_equivalence},
      {"tv endpoints", tv_endpoints},
      {"tv trend on the semigroup", tv_trend_semigroup},
      {"tv trend on F_2", tv_trend_free_group},
      {"drift", drift},
      {"exact dimension", exact_dimension},
      {"continuity in rho", continuity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
