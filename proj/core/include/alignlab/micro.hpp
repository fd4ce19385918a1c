#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alignlab/averaging.hpp"
#include "alignlab/transport.hpp"

namespace alignlab {

/// N agents on the torus.
struct ParticleEnsemble {
  TorusGeometry geom;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<double> m;
  double time = 0.0;

  ParticleEnsemble() = default;
  /// Validates sizes and positive masses; wraps positions.
  ParticleEnsemble(const TorusGeometry& g, std::vector<Vec> x, std::vector<Vec> v,
                   std::vector<double> m);

  std::size_t size() const { return x.size(); }
  double total_mass() const;
  DensityView density() const;
};

enum class MicroVariant { CuckerSmale, MotschTadmor, SModel, WModel };

struct MicroModel {
  MicroVariant variant = MicroVariant::CuckerSmale;
  double lambda = 1.0;
  CommunicationKernel kernel = CommunicationKernel::constant(1.0);
  AveragingModel averaging;             // SModel
  std::optional<GridField> strength;    // SModel
  std::optional<WeightField> weight;    // WModel

  static MicroModel cucker_smale(double lambda, CommunicationKernel k);
  static MicroModel motsch_tadmor(double lambda, CommunicationKernel k);
  static MicroModel s_model(double lambda, AveragingModel averaging, GridField s);
  static MicroModel w_model(double lambda, CommunicationKernel k, WeightField w);
};

/// Right-hand side dv_i/dt of the model at the current state.
std::vector<Vec> acceleration(const MicroModel& model, const ParticleEnsemble& ens);

/// Communication strength s(x_i) felt by each particle (rho_phi for CS, 1 for MT).
std::vector<double> particle_strength(const MicroModel& model, const ParticleEnsemble& ens);

/// Largest dt admitted by the particle bound 0.1 / (lambda max s) and the field CFL.
double micro_admissible_dt(const MicroModel& model, const ParticleEnsemble& ens);

/// Velocity field that transports the model's field, evaluated on `grid` from the particles:
/// [u^N] for the s-model, the Favre average for the w-model.
GridVelocity field_velocity(const MicroModel& model, const ParticleEnsemble& ens,
                            const GridSpec& grid);

struct MicroStep {
  ParticleEnsemble ensemble;
  MicroModel model;
};

/// Strang step: field half step, RK4 particle step with frozen field, field half step.
MicroStep step(const MicroModel& model, const ParticleEnsemble& ens, double dt);

struct MicroDiagnostics {
  double t = 0.0;
  double velocity_diameter = 0.0;
  double flock_diameter = 0.0;
  double max_speed = 0.0;
  Vec total_momentum{0.0, 0.0};
  double j_running = 0.0;
  double field_mass = 0.0;  // integral of s (s-model) or w (w-model)
};

/// Instantaneous diagnostics; j_running is max(previous_j, sum m_i |v_i|).
MicroDiagnostics diagnostics(const ParticleEnsemble& ens, double previous_j = 0.0);

struct MicroRun {
  std::vector<MicroDiagnostics> series;
  ParticleEnsemble final_ensemble;
  MicroModel final_model;
  bool aborted = false;
  std::string error;
};

using MicroObserver = std::function<void(const MicroModel&, const ParticleEnsemble&)>;

/// Integrates to time T with steps of at most dt, recording diagnostics every `every` steps
/// and at the end. Step errors stop the run and are reported with the partial series.
MicroRun run(const MicroModel& model, const ParticleEnsemble& ens, double T, double dt,
             int every = 1, const MicroObserver& observer = {});

}  // namespace alignlab
