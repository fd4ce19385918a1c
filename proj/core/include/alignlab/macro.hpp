#pragma once

#include <memory>
#include <vector>

#include "alignlab/averaging.hpp"
#include "alignlab/grid.hpp"
#include "alignlab/spectral.hpp"

namespace alignlab {

enum class Pressure { Pressureless, Isentropic };

/// 1D hydrodynamic state (rho, s, u) on a periodic grid.
struct MacroState {
  GridField rho;
  GridField s;
  GridField u;
  Pressure pressure = Pressure::Pressureless;
  double time = 0.0;
  /// max |u_x| of the initial data, used by the blow-up detector.
  double initial_max_gradient = 0.0;
};

/// Solver configuration shared by all steps of a run.
class MacroModel {
 public:
  MacroModel(AveragingModel averaging, const GridSpec& grid, double lambda = 1.0);

  const AveragingModel& averaging() const { return averaging_; }
  const GridSpec& grid() const { return grid_; }
  double lambda() const { return lambda_; }
  const Spectral1D& spectral() const { return *spectral_; }

  /// [u]_rho on the grid.
  std::vector<double> average(const GridField& rho, const GridField& u) const;

  double cfl = 0.5;                  // advective/acoustic CFL number
  double blowup_factor = 1e3;        // gradient growth that counts as blow-up
  double tail_threshold = 1e-6;      // spectral under-resolution threshold
  double vacuum_fraction = 1e-8;     // vacuum threshold relative to mass / period

 private:
  AveragingModel averaging_;
  GridSpec grid_;
  double lambda_;
  std::shared_ptr<const Spectral1D> spectral_;
};

MacroState make_macro_state(GridField rho, GridField s, GridField u, Pressure pressure,
                            const MacroModel& model);

struct MacroTendency {
  std::vector<double> rho;
  std::vector<double> s;
  std::vector<double> q;  // u (pressureless) or m = rho u (isentropic)
};

/// Time derivatives; throws VacuumError below the vacuum threshold and BlowUpError on NaN/Inf.
MacroTendency macro_rhs(const MacroState& state, const MacroModel& model);

double macro_admissible_dt(const MacroState& state, const MacroModel& model);

/// Classical RK4 step. Throws StepRejected above the CFL bound and BlowUpError when the result is
/// non-finite, its gradient grew past blowup_factor, or it is no longer spectrally resolved.
MacroState macro_step(const MacroState& state, const MacroModel& model, double dt);

struct EQuantity {
  GridField e;
  double min = 0.0;
  double max = 0.0;
  double integral = 0.0;
};

/// e = u_x + s with a spectral derivative.
EQuantity e_quantity(const MacroState& state, const MacroModel& model);

struct ThresholdSample {
  double t, min_e, max_gradient, e_integral, rho_mass, s_mass, u_oscillation;
};

struct ThresholdResult {
  bool regular = true;
  double blowup_time = 0.0;  // detection time when !regular
  std::string reason;
  double min_e = 0.0;        // over the probed interval
  double max_e_integral_drift = 0.0;
  std::vector<ThresholdSample> series;
  MacroState last_state;
};

/// Runs to T (or detection) with steps of at most dt and classifies the data.
ThresholdResult threshold_probe(const MacroState& initial, const MacroModel& model, double T,
                                double dt, int every = 10);

}  // namespace alignlab
