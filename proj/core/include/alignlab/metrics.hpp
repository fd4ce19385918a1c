#pragma once

#include <functional>
#include <vector>

#include "alignlab/grid.hpp"
#include "alignlab/kinetic.hpp"
#include "alignlab/torus.hpp"

namespace alignlab {

/// Weighted atoms on a circle of the given period. Grid densities become node atoms.
struct Measure1D {
  double period = 1.0;
  std::vector<double> points;
  std::vector<double> masses;

  static Measure1D atoms(double period, std::vector<double> points, std::vector<double> masses);
  static Measure1D from_grid(const GridField& rho);
  double total_mass() const;
};

/// W1 on the circle: min over c of int |F_mu - F_nu - c|, c the weighted median of F_mu - F_nu.
double w1_circle(const Measure1D& mu, const Measure1D& nu);

/// W2 on the circle: quantile coupling minimized over the circular shift by golden-section
/// search (shift tolerance 1e-10).
double w2_circle(const Measure1D& mu, const Measure1D& nu);

/// Largest support accepted by w_p_empirical.
inline constexpr std::size_t kEmpiricalAtomLimit = 2000;

/// (min over couplings of sum d(i,j)^p g_ij)^(1/p) for atoms with masses a and b and a
/// user-supplied ground distance. Throws SizeLimit above kEmpiricalAtomLimit atoms per side.
double w_p_empirical(const std::vector<double>& a, const std::vector<double>& b,
                     const std::function<double(int, int)>& distance, int p);

/// Same, for atoms on a torus with the minimal-image distance.
double w_p_empirical(const TorusGeometry& geom, const std::vector<Vec>& x,
                     const std::vector<double>& a, const std::vector<Vec>& y,
                     const std::vector<double>& b, int p);

struct MonokineticDeviation {
  double modulated_energy = 0.0;  // e(f | u)
  double w2_spatial = 0.0;        // W2(rho_f, rho)
  double combined = 0.0;          // sqrt(e + W2^2)
};

/// Distance proxy between a kinetic density and a monokinetic macro state (rho, u).
MonokineticDeviation monokinetic_deviation(const KineticGrid& grid, const std::vector<double>& f,
                                           const GridField& rho, const GridField& u);

/// int |f - g| dx dv.
double l1_distance(const KineticGrid& grid, const std::vector<double>& f,
                   const std::vector<double>& g);

}  // namespace alignlab
