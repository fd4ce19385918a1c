#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alignlab/config.hpp"
#include "alignlab/io.hpp"
#include "alignlab/micro.hpp"
#include "alignlab/svg.hpp"

namespace alignlab {

enum class Verdict { Pass, Fail, Inconclusive, Info };
std::string to_string(Verdict v);

struct Check {
  std::string name;
  Verdict verdict = Verdict::Info;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Numeric table emitted as one CSV.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  void add(std::vector<double> row);
  /// Values of one column.
  std::vector<double> column(const std::string& name) const;
};

struct NamedPlot {
  std::string name;
  LinePlot plot;
};

struct NamedCheckpoint {
  std::string name;
  Checkpoint data;
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<NamedPlot> plots;
  std::vector<NamedCheckpoint> checkpoints;

  void metric(const std::string& name, double value);
  double metric_value(const std::string& name) const;
  /// Pass/Fail check.
  Check& check(const std::string& name, bool ok, double value, double threshold,
               const std::string& detail = {});
  /// Check backed by a fit: inconclusive whenever the fit residual exceeds `residual_limit`.
  Check& fit_check(const std::string& name, bool ok, double residual, double residual_limit,
                   double value, double threshold, const std::string& detail = {});
  void info(const std::string& name, double value, const std::string& detail = {});
  const Check& find_check(const std::string& name) const;
  /// True when every non-informational check passed.
  bool passed() const;
};

ExperimentReport exp_heterogeneous(const RunConfig& config);
ExperimentReport exp_mean_field(const RunConfig& config);
ExperimentReport exp_monokinetic(const RunConfig& config);
ExperimentReport exp_maxwellian(const RunConfig& config);
ExperimentReport exp_relaxation(const RunConfig& config);
ExperimentReport exp_threshold(const RunConfig& config);
ExperimentReport simulate_micro(const RunConfig& config);
ExperimentReport simulate_kinetic(const RunConfig& config);
ExperimentReport simulate_macro(const RunConfig& config);
ExperimentReport spectral_gap_study(const RunConfig& config);

/// Deterministic stratified sample of the smooth initial measure used by the particle studies:
/// x at stratified quantiles of 1 + a cos(2 pi x) (the second axis on the golden-ratio
/// lattice), v = u0(x) plus a normal quantile of a Kronecker sequence. The seed only
/// chooses the Cranley-Patterson shifts.
ParticleEnsemble sample_initial(const RunConfig& config, int N);

/// Particle model named by [micro] model on the given ensemble's torus.
MicroModel micro_model_from_config(const RunConfig& config, const TorusGeometry& geom,
                                   const ParticleEnsemble& ens);

/// Dispatches on config.experiment.name.
ExperimentReport run_experiment(const RunConfig& config);

/// Writes <table>.csv per table, summary.csv, summary.json, <plot>.svg and <checkpoint>.bin into
/// `dir` and returns the written paths. Throws IoError naming the path on failure.
std::vector<std::filesystem::path> emit_outputs(const ExperimentReport& report,
                                                const std::filesystem::path& dir);

}  // namespace alignlab
