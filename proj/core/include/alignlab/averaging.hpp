#pragma once

#include <optional>
#include <span>
#include <vector>

#include "alignlab/grid.hpp"
#include "alignlab/kernels.hpp"
#include "alignlab/torus.hpp"

namespace alignlab {

/// Denominators below this are treated as vacuum.
inline constexpr double kDivisionHazard = 1e-14;

/// A density as weighted atoms. Grid densities become node atoms of mass rho_i * h^n and keep
/// their grid so that grid-aware operations can use convolution tables.
struct DensityView {
  TorusGeometry geom;
  std::vector<Vec> points;
  std::vector<double> masses;
  std::optional<GridSpec> grid;

  static DensityView atoms(const TorusGeometry& geom, std::vector<Vec> points,
                           std::vector<double> masses);
  static DensityView on_grid(const GridField& rho);

  std::size_t size() const { return points.size(); }
  double total_mass() const;
};

enum class AveragingVariant { CsMtKernel, OverMollifiedMphi, Segregation, FavreDirect };

/// Environmental averaging with an integral representation [u](x) = sum_y Phi(x,y) u(y) m(y).
struct AveragingModel {
  AveragingVariant variant = AveragingVariant::CsMtKernel;
  CommunicationKernel kernel = CommunicationKernel::constant(1.0);
  /// Segregation pieces g_l, linearly interpolated; must sum to one.
  std::vector<GridField> pieces;
  /// Base resolution per axis of the Mphi inner z-quadrature (used at twice this value).
  int quadrature_resolution = 64;

  static AveragingModel cs_mt(CommunicationKernel k);
  static AveragingModel favre(CommunicationKernel k);
  static AveragingModel mphi(CommunicationKernel k, int quadrature_resolution = 64);
  /// Throws InvalidArgument if the pieces are negative or fail to sum to one at their nodes.
  static AveragingModel segregation(std::vector<GridField> pieces);
};

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;
  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// rho_phi(x) = sum_j m_j phi(|x - y_j|) at each eval point.
std::vector<double> convolve_density(const CommunicationKernel& k, const DensityView& rho,
                                     std::span<const Vec> eval);

/// Phi_rho(x, y) for x in X (rows) and y in Y (columns).
DenseMatrix kernel_matrix(const AveragingModel& model, const DensityView& rho,
                          std::span<const Vec> X, std::span<const Vec> Y);

/// sum_j m_j Phi_rho(x, y_j) v_j with v_j the velocity of atom j.
std::vector<Vec> velocity_average(const AveragingModel& model, const DensityView& rho,
                                  std::span<const Vec> velocities, std::span<const Vec> eval);

/// max_x |sum_j m_j Phi_rho(x, y_j) - 1| over the eval points (the atoms when empty).
double check_right_stochastic(const AveragingModel& model, const DensityView& rho,
                              std::span<const Vec> eval = {});

/// u_F = (u rho)_phi / rho_phi on the grid of rho.
GridField favre_average(const CommunicationKernel& k, const GridField& rho, const GridField& u);

/// u_delta = ((u rho)_Psi / rho_Psi)_Psi with discretely normalized mollifier weights.
GridField special_mollified_velocity(const GridField& rho, const GridField& u,
                                     const Mollifier& m);

/// Result of the projected power iteration.
struct SpectralGapResult {
  double epsilon0;
  double lambda_max;
  int iterations;
  double residual;
};

/// 1 - sup of the kappa-weighted Rayleigh quotient of the symmetrized averaging operator
/// (s = w rho_phi) over fields with zero rho-mean. Throws IterationLimit if the power
/// iteration does not reach relative tolerance `tol`.
SpectralGapResult spectral_gap_estimate(const CommunicationKernel& k, const GridField& rho,
                                        const GridField& w, double tol = 1e-8,
                                        int max_iterations = 200000);

}  // namespace alignlab
