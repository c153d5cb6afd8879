// Command-line runner for the verification suites.
//
//   lrg <suite> --config PATH [--out DIR] [--experiment NAME] [--seed N] [--verbose]
//
// Exit status: 0 all contracts hold, 1 a contract failed, 2 invalid configuration,
// 3 internal error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lrg/experiments.hpp"

namespace {

constexpr int kExitContract = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice renormalization-group verification suites"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::string experiment;
  std::uint64_t seed = 0;
  bool verbose = false;

  std::vector<std::string> names = lrg::suite_names();
  names.push_back("all");
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name, name == "all" ? "run every suite" : "run the " + name + " suite");
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--experiment", experiment, "experiment name (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_flag("--verbose", verbose, "print every metric");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  lrg::ExperimentConfig cfg;
  try {
    cfg = lrg::load_config(config_path);
    if (!experiment.empty()) {
      lrg::validate_experiment_name(experiment);
      cfg.experiment = experiment;
    }
    if (app.get_subcommands().front()->count("--seed")) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output = out_dir;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const std::vector<std::string> suites =
      command == "all" ? lrg::suite_names() : std::vector<std::string>{command};
  std::vector<lrg::SuiteResult> results;
  try {
    for (const auto& name : suites) {
      lrg::SuiteResult r = lrg::run_suite(name, cfg);
      lrg::write_csv(cfg.output, r, cfg);
      if (verbose)
        for (const auto& row : r.rows)
          std::printf("  %-48s %-24.17g %-12s %s\n", row.metric.c_str(), row.value, row.tolerance.c_str(),
                      row.pass.c_str());
      std::printf("%-16s %s  (%.2f s)\n", name.c_str(), r.passed() ? "pass" : "FAIL", r.wall_time_s);
      results.push_back(std::move(r));
    }
    lrg::write_summary(cfg.output, results, cfg);
  } catch (const lrg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  for (const auto& r : results)
    if (!r.passed()) return kExitContract;
  return 0;
}
