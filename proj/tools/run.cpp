#include <ostream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "noisywalk/errors.hpp"

namespace noisywalk::cli {

namespace {

void add_run_flags(CLI::App& sub, std::string& config_path, Flags& f) {
  sub.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  sub.add_option("--seed", f.seed, "random seed (required, here or in the config)");
  sub.add_option("--trials", f.trials, "Monte Carlo trials or boundary samples");
  auto* rho = sub.add_option("--rho", f.rho, "noise level in [0, 1]");
  auto* grid = sub.add_option("--rho-grid", f.rho_grid, "grid a:b:step");
  rho->excludes(grid);
  sub.add_option("--n", f.n, "walk length (the horizon for dimension)");
  sub.add_option("--group", f.group, "free_group:k or free_semigroup:m");
  sub.add_option("--out", f.out, "output directory");
  sub.add_option("--workers", f.workers, "worker threads, 0 for all cores");
  sub.add_flag("--plot", f.plot, "also write plot.svg");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy coupled random walks on free groups and semigroups", "noisywalk-cli"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config_path;
  Flags flags;
  std::vector<std::pair<Subcommand, CLI::App*>> subs;
  const std::pair<Subcommand, const char*> specs[] = {
      {Subcommand::drift, "speed of the coupled walk"},
      {Subcommand::entropy, "asymptotic entropy of the coupled walk"},
      {Subcommand::tv, "total variation between coupled and independent walks"},
      {Subcommand::dimension, "local dimension of the boundary measure"},
      {Subcommand::sweep, "entropy, drift and distance over a rho grid"},
      {Subcommand::report, "rebuild table and plot from results.json"}};
  for (const auto& [command, help] : specs) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(command)), help);
    if (command == Subcommand::report) {
      sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
      sub->add_option("--out", flags.out, "output directory");
      sub->add_flag("--plot", flags.plot, "also write plot.svg");
    } else {
      add_run_flags(*sub, config_path, flags);
    }
    subs.emplace_back(command, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Subcommand command = Subcommand::drift;
  for (const auto& [c, sub] : subs)
    if (sub->parsed()) command = c;

  std::vector<std::string> args(argv, argv + argc);
  try {
    nlohmann::json doc = config_path.empty() ? nlohmann::json::object() : load_config_file(config_path);
    const RunConfig config = parse_config(command, apply_flags(std::move(doc), command, flags));
    const Report report = execute(config, err);
    write_report(report, config.out, config.plot);
    write_metadata(config, config.out, args);
    out << "wrote " << report.records.size() << " records to " << config.out.string() << '\n';
    return 0;
  } catch (const TruncationError& e) {
    err << "error: " << e.what() << "\ntruncation: convolution level " << e.step()
        << " exceeded the support cap; a truncating run would drop mass " << e.lost_mass()
        << " there. Raise 'cap' or set options.truncate.\n";
    return 3;
  } catch (const BudgetError& e) {
    err << "error: compute budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace noisywalk::cli
