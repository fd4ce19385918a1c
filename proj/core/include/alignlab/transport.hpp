#pragma once

#include "alignlab/averaging.hpp"
#include "alignlab/grid.hpp"

namespace alignlab {

/// Transported weight w together with the range of its initial data.
struct WeightField {
  GridField w;
  double initial_min = 0.0;
  double initial_max = 0.0;

  WeightField() = default;
  explicit WeightField(GridField field);
};

/// Velocity component fields on a grid (component 1 unused in 1D).
struct GridVelocity {
  GridField component[2];

  static GridVelocity from_vectors(const GridSpec& grid, std::span<const Vec> values);
  /// 1D velocity field.
  static GridVelocity from_scalar(const GridField& u);
  Vec at(const Vec& x) const;
  double max_abs(int axis) const;
};

/// Largest dt accepted by the transport steppers: 0.5 h / max|v| on each axis.
double transport_cfl_dt(const GridVelocity& velocity);

/// Conservative first-order upwind update of s_t + div(s v) = 0; face velocities are averages
/// of the adjacent nodes. 2D uses x then y sweeps. Throws StepRejected above the CFL bound.
GridField advance_strength(const GridField& s, const GridVelocity& velocity, double dt);

/// Semi-Lagrangian update of w_t + v . grad w = 0 with an RK2 midpoint foot and periodic
/// multilinear interpolation. Throws StepRejected above the CFL bound.
WeightField advance_weight(const WeightField& w, const GridVelocity& velocity, double dt);

/// s = w rho_phi at the nodes of w.
GridField weight_to_strength(const GridField& w, const DensityView& rho,
                             const CommunicationKernel& k);

}  // namespace alignlab
