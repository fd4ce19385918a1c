#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alignlab/averaging.hpp"
#include "alignlab/kernels.hpp"

namespace alignlab {

struct KernelConfig {
  /// inverse_power: (1 + r^2)^(-beta); constant: phi == value; bochner: psi * psi with psi the
  /// inverse power profile.
  std::string family = "inverse_power";
  double beta = 0.5;
  double value = 1.0;
  int bochner_resolution = 256;
};

struct AveragingConfig {
  /// cs_mt, favre, mphi.
  std::string variant = "favre";
  int quadrature_resolution = 64;
};

struct MicroConfig {
  int dim = 1;
  /// cs, mt, w, s.
  std::string model = "w";
  int n = 200;
  double lambda = 1.0;
  double t_end = 2.0;
  double dt = 0.02;
  int grid = 128;
  int every = 10;
  std::vector<int> n_sweep{50, 100, 200, 400, 800};
  double mass_ratio = 100.0;
  int small_count = 10;
  int large_count = 20;
  bool single_flock = false;
  double velocity_spread = 0.1;
  double u_amplitude = 0.5;
  double rho_amplitude = 0.3;
  double w_amplitude = 0.3;
};

struct KineticConfig {
  int nx = 128;
  int nv = 256;
  double vmax = 6.0;
  double lambda = 1.0;
  double t_end = 2.0;
  double dt = 0.0;  // 0 selects the admissible step
  double x_cfl = 1.0;
  /// vlasov, monokinetic, maxwellian, fpa.
  std::string regime = "maxwellian";
  double epsilon = 0.1;
  double delta = 0.01;
  double sigma = 1.0;
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  /// delta = epsilon^delta_exponent in sweeps.
  double delta_exponent = 2.0;
  std::vector<double> sigmas{0.5, 1.0};
  double rho_amplitude = 0.2;
  double u_amplitude = 0.1;
  double w_variation = 0.05;
  /// a in the ill-prepared kinetic bulk velocity u0 + a sqrt(epsilon) cos(2 pi x).
  double ill_prepared = 0.25;
  int every = 10;
};

struct MacroConfig {
  int n = 256;
  double t_end = 5.0;
  double dt = 0.002;
  double lambda = 1.0;
  /// pressureless, isentropic.
  std::string pressure = "pressureless";
  double rho_amplitude = 0.2;
  double u_amplitude = 0.1;
  double sub_amplitude = 0.1;
  double super_amplitude = 0.5;
  int every = 10;
};

/// Pass/fail thresholds; defaults follow each study's declared tolerances.
struct Tolerances {
  double residual = 0.2;
  double conservation = 1e-8;
  double speed_change = 0.05;
  double spread_decay = 0.9;
  double separation_factor = 10.0;
  double exponent_min = 0.4;
  double exponent_max = 0.7;
  double entropy_growth = 1.5;
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 20240611;
  std::string out = "out";
  Tolerances tol;
};

struct RunConfig {
  KernelConfig kernel;
  AveragingConfig averaging;
  MicroConfig micro;
  KineticConfig kinetic;
  MacroConfig macro;
  ExperimentConfig experiment;
};

/// Names accepted on the command line.
const std::vector<std::string>& experiment_names();

/// Defaults of a named experiment. Throws ConfigError for unknown names.
RunConfig default_config(const std::string& experiment);

/// Defaults of `experiment` overridden by the TOML document. Unknown sections or keys and
/// out-of-range values throw ConfigError naming the offending key.
RunConfig parse_config(const std::string& toml_text, const std::string& experiment,
                       const std::string& source = "<string>");
RunConfig load_config(const std::filesystem::path& path, const std::string& experiment);

/// Range checks on every field; throws ConfigError.
void validate(const RunConfig& config);

/// Kernel described by the [kernel] section on the given torus.
CommunicationKernel make_kernel(const KernelConfig& k, const TorusGeometry& geom);
AveragingModel make_averaging(const AveragingConfig& a, const CommunicationKernel& k);

}  // namespace alignlab
