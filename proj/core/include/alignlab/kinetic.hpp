#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "alignlab/averaging.hpp"
#include "alignlab/grid.hpp"
#include "alignlab/transport.hpp"

namespace alignlab {

/// Phase grid on T^1 x [-V, V]: x nodes i*hx, v cell centres -V + (k + 1/2) dv.
struct KineticGrid {
  double period = 1.0;
  int nx = 128;
  int nv = 256;
  double vmax = 6.0;

  KineticGrid() = default;
  KineticGrid(double period, int nx, int nv, double vmax);

  double hx() const { return period / nx; }
  double dv() const { return 2.0 * vmax / nv; }
  double x(int i) const { return i * hx(); }
  double v(int k) const { return -vmax + (k + 0.5) * dv(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * nv; }
  std::size_t index(int i, int k) const { return static_cast<std::size_t>(i) * nv + k; }
  GridSpec x_grid() const;

  bool operator==(const KineticGrid& o) const;
};

enum class KineticRegime { Vlasov, Monokinetic, Maxwellian, FokkerPlanckAlignment };

struct KineticParams {
  double lambda = 1.0;   // alignment coupling
  double epsilon = 0.1;  // penalization scale (Monokinetic, Maxwellian)
  double delta = 0.01;   // mollifier scale of u_delta
  double sigma = 1.0;    // temperature (FokkerPlanckAlignment)
  double x_cfl = 1.0;    // dt <= x_cfl * hx / V
};

/// Phase density f (x-major: f[i * nv + k]) with its strength or weight field.
struct KineticState {
  KineticGrid grid;
  std::vector<double> f;
  double time = 0.0;
  KineticParams params;
  /// Averaging [u]_rho of the s-model; FokkerPlanckAlignment always uses the Favre average.
  AveragingModel averaging;
  /// s on the x grid (s-model regimes).
  GridField strength;
  /// w on the x grid (FokkerPlanckAlignment).
  std::optional<WeightField> weight;

  double mass() const;
};

/// Sets up a state; the strength is the given field and, when `weight` is present, the state
/// runs the weight formulation (strength is then derived as w rho_phi).
KineticState make_kinetic_state(const KineticGrid& grid, std::vector<double> f,
                                const KineticParams& params, AveragingModel averaging,
                                GridField strength, std::optional<WeightField> weight = {});

/// Point values rho(x) / sqrt(2 pi theta) exp(-(v - u(x))^2 / (2 theta)).
std::vector<double> local_maxwellian(const KineticGrid& grid, const GridField& rho,
                                     const GridField& u, double theta);

/// rho(x) delta(v - u(x)) deposited on the two v cells around u(x) so that the cell mass and the
/// mean velocity are exact.
std::vector<double> monokinetic_ansatz(const KineticGrid& grid, const GridField& rho,
                                       const GridField& u);

struct Moments {
  GridField rho;
  GridField momentum;
  GridField u;            // momentum / rho, 0 where vacuous
  std::vector<bool> vacuum;
  double mass = 0.0;
  double energy = 0.0;    // (1/2) int |v|^2 f
};

Moments moments(const KineticGrid& grid, const std::vector<double>& f);
Moments moments(const KineticState& state);

/// Largest admissible step: x_cfl * hx / V, and the strength/weight transport CFL.
double kinetic_admissible_dt(const KineticState& state);

/// Strang step [field dt/2][x dt/2][v dt][x dt/2][field dt/2] of the chosen regime. The v
/// substep solves the linear drift-diffusion with frozen coefficients exactly per column.
KineticState kinetic_step(const KineticState& state, KineticRegime regime, double dt);

KineticState vlasov_step(const KineticState& state, double dt);
KineticState monokinetic_step(const KineticState& state, double dt);
KineticState maxwellian_step(const KineticState& state, double dt);
KineticState fpa_step(const KineticState& state, double dt);

/// Single substeps, exposed for testing.
/// Free transport f_t + v f_x = 0 over dt (conservative, positivity-preserving).
std::vector<double> x_transport(const KineticGrid& grid, const std::vector<double>& f, double dt);
/// f_t = d_v(kappa (v - U) f) + D d_vv f over dt in one column with constant coefficients.
void ou_column(std::span<double> column, const KineticGrid& grid, double kappa, double target,
               double diffusion, double dt);

/// Translates a column in v by upwind flux until its mean equals `mean` (mass at the cut-off
/// limits the reachable shift).
void shift_column_mean(std::span<double> column, const KineticGrid& grid, double mean);

/// Fields entering the velocity substep at the current state.
struct AlignmentFields {
  GridField s;         // strength
  GridField average;   // [u]_rho (Favre average for the weight formulation)
  GridField u_delta;   // special mollified velocity
};
AlignmentFields alignment_fields(const KineticState& state, const Moments& m);
/// [u]_rho of the moments under an averaging model.
GridField average_velocity(const AveragingModel& model, const Moments& m);

// ---- diagnostics ---------------------------------------------------------------------------

struct EntropySplit {
  double total = 0.0;     // H(f | mu)
  double kinetic = 0.0;   // H_eps
  double macro = 0.0;     // G_eps
  bool divergent = false;
};

/// H(f | mu) with mu = rho_ref / sqrt(2 pi theta) exp(-(v - u_ref)^2 / (2 theta)), and its split
/// into the f-only part and the moment part. 0 log 0 = 0.
EntropySplit relative_entropy(const KineticGrid& grid, const std::vector<double>& f,
                              const GridField& rho_ref, const GridField& u_ref,
                              double theta = 1.0);

/// Entropy relative to the global Maxwellian of mass M, mean ubar and variance theta.
double relative_entropy_global(const KineticGrid& grid, const std::vector<double>& f,
                               double ubar, double theta);

/// int |d_v f + (1 + eps s / 2)(v - u) f|^2 / f with central differences; u defaults to the
/// local mean velocity of f.
double fisher_information(const KineticState& state, const GridField* u_ref = nullptr);

/// e(f | u) = int |v - u(x)|^2 f.
double modulated_kinetic_energy(const KineticGrid& grid, const std::vector<double>& f,
                                const GridField& u);

/// ubar = int u rho / M.
double mean_velocity(const KineticState& state);

/// d ubar / dt = (1/M) int ([u]_rho - u) s rho dx.
double momentum_drift(const KineticState& state);

/// Mass within three cells of |v| = V, relative to the total.
double boundary_mass_fraction(const KineticState& state);

}  // namespace alignlab
