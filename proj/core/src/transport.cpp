#include "alignlab/transport.hpp"

#include <algorithm>
#include <cmath>

#include "alignlab/error.hpp"

namespace alignlab {

WeightField::WeightField(GridField field)
    : w(std::move(field)), initial_min(w.min()), initial_max(w.max()) {
  if (initial_min < 0.0) throw InvalidArgument("weight field must be nonnegative");
}

GridVelocity GridVelocity::from_vectors(const GridSpec& grid, std::span<const Vec> values) {
  if (static_cast<int>(values.size()) != grid.size())
    throw InvalidGrid("velocity sample count does not match its grid");
  GridVelocity out{GridField(grid), GridField(grid)};
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.component[0].values[i] = values[i][0];
    out.component[1].values[i] = values[i][1];
  }
  return out;
}

GridVelocity GridVelocity::from_scalar(const GridField& u) {
  return GridVelocity{u, GridField(u.grid)};
}

Vec GridVelocity::at(const Vec& x) const {
  const bool two_d = component[0].grid.geom.dim == 2;
  return {sample_field(component[0], x), two_d ? sample_field(component[1], x) : 0.0};
}

double GridVelocity::max_abs(int axis) const {
  double m = 0.0;
  for (double v : component[axis].values) m = std::max(m, std::abs(v));
  return m;
}

double transport_cfl_dt(const GridVelocity& velocity) {
  const GridSpec& g = velocity.component[0].grid;
  double dt = INFINITY;
  for (int a = 0; a < g.geom.dim; ++a) {
    const double vmax = velocity.max_abs(a);
    if (vmax > 0.0) dt = std::min(dt, 0.5 * g.h(a) / vmax);
  }
  return dt;
}

namespace {

void check_cfl(const GridVelocity& velocity, double dt) {
  if (!(dt >= 0.0)) throw InvalidArgument("time step must be nonnegative");
  const double limit = transport_cfl_dt(velocity);
  if (dt > limit * (1.0 + 1e-12)) throw StepRejected("transport CFL violated", limit);
}

// One upwind sweep along `axis`.
void upwind_sweep(std::vector<double>& s, const GridField& vel, int axis, double dt) {
  const GridSpec& g = vel.grid;
  const double r = dt / g.h(axis);
  const int n0 = g.n[0], n1 = g.n[1];
  const int len = g.n[axis];
  const int lines = axis == 0 ? n1 : n0;
  std::vector<double> line(len), flux(len);
  for (int l = 0; l < lines; ++l) {
    auto idx = [&](int k) { return axis == 0 ? g.index(k, l) : g.index(l, k); };
    for (int k = 0; k < len; ++k) line[k] = s[idx(k)];
    for (int k = 0; k < len; ++k) {  // face k + 1/2
      const int kp = (k + 1) % len;
      const double a = 0.5 * (vel.values[idx(k)] + vel.values[idx(kp)]);
      flux[k] = a > 0.0 ? a * line[k] : a * line[kp];
    }
    for (int k = 0; k < len; ++k) {
      const int km = (k + len - 1) % len;
      s[idx(k)] = line[k] - r * (flux[k] - flux[km]);
    }
  }
}

}  // namespace

GridField advance_strength(const GridField& s, const GridVelocity& velocity, double dt) {
  if (!(s.grid == velocity.component[0].grid)) throw InvalidGrid("strength/velocity grid mismatch");
  check_cfl(velocity, dt);
  GridField out = s;
  for (int a = 0; a < s.grid.geom.dim; ++a) upwind_sweep(out.values, velocity.component[a], a, dt);
  out.time = s.time + dt;
  return out;
}

WeightField advance_weight(const WeightField& w, const GridVelocity& velocity, double dt) {
  const GridSpec& g = w.w.grid;
  if (!(g == velocity.component[0].grid)) throw InvalidGrid("weight/velocity grid mismatch");
  check_cfl(velocity, dt);
  WeightField out = w;
  for (int i = 0; i < g.size(); ++i) {
    const Vec x = g.node(i);
    const Vec mid = x - (0.5 * dt) * velocity.at(x);
    const Vec foot = x - dt * velocity.at(mid);
    out.w.values[i] = sample_field(w.w, foot);
  }
  out.w.time = w.w.time + dt;
  return out;
}

GridField weight_to_strength(const GridField& w, const DensityView& rho,
                             const CommunicationKernel& k) {
  std::vector<double> rp;
  if (rho.grid && *rho.grid == w.grid) {
    std::vector<double> dens(rho.masses.size());
    const double cell = w.grid.cell_volume();
    for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = rho.masses[i] / cell;
    rp = GridConvolver(k, w.grid).apply(dens);
  } else {
    rp = convolve_density(k, rho, w.grid.nodes());
  }
  GridField s(w.grid);
  s.time = w.time;
  for (std::size_t i = 0; i < rp.size(); ++i) s.values[i] = w.values[i] * rp[i];
  return s;
}

}  // namespace alignlab
