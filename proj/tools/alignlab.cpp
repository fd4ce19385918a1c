// alignlab <experiment> --config <path> [--out <dir>] [--seed <u64>]

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "alignlab/config.hpp"
#include "alignlab/error.hpp"
#include "alignlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale lab for alignment dynamics"};
  std::string experiment, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(alignlab::experiment_names()));
  app.add_option("--config,-c", config_path, "TOML configuration file")->check(CLI::ExistingFile);
  app.add_option("--out,-o", out_dir, "Output directory (overrides [experiment] out)");
  app.add_option("--seed,-s", seed, "Seed (overrides [experiment] seed)");
  CLI11_PARSE(app, argc, argv);

  try {
    alignlab::RunConfig config = config_path.empty()
                                     ? alignlab::default_config(experiment)
                                     : alignlab::load_config(config_path, experiment);
    if (seed) config.experiment.seed = *seed;
    if (!out_dir.empty()) config.experiment.out = out_dir;
    alignlab::validate(config);

    const auto start = std::chrono::steady_clock::now();
    const alignlab::ExperimentReport report = alignlab::run_experiment(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto files = alignlab::emit_outputs(report, config.experiment.out);

    for (const auto& c : report.checks)
      std::cout << '[' << alignlab::to_string(c.verdict) << "] " << c.name << ": "
                << alignlab::format_double(c.value) << (c.detail.empty() ? "" : "  (" + c.detail + ")")
                << '\n';
    std::cout << experiment << ": " << (report.passed() ? "PASS" : "FAIL") << " in " << seconds
              << " s, " << files.size() << " files in " << config.experiment.out << '\n';
    return report.passed() ? 0 : 1;
  } catch (const alignlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const alignlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 4;
  }
}
