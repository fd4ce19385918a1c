#include <cmath>
#include <numbers>

#include "alignlab/error.hpp"
#include "alignlab/kinetic.hpp"

namespace alignlab {

EntropySplit relative_entropy(const KineticGrid& grid, const std::vector<double>& f,
                              const GridField& rho_ref, const GridField& u_ref, double theta) {
  if (f.size() != grid.size()) throw InvalidGrid("phase density size does not match the grid");
  if (!(theta > 0.0)) throw InvalidArgument("Maxwellian variance must be positive");
  const Moments m = moments(grid, f);
  const double cell = grid.hx() * grid.dv();
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi * theta);
  EntropySplit out;
  for (int i = 0; i < grid.nx; ++i) {
    const double r = rho_ref.values[i];
    const double u = u_ref.values[i];
    const double logr = r > 0.0 ? std::log(r) : -INFINITY;
    double kin = 0.0, tot = 0.0;
    for (int k = 0; k < grid.nv; ++k) {
      const double fv = f[grid.index(i, k)];
      if (fv <= 0.0) continue;
      const double v = grid.v(k);
      const double flogf = fv * std::log(fv);
      kin += flogf + 0.5 * v * v * fv / theta;
      const double d = v - u;
      tot += flogf - fv * (logr - log_norm - 0.5 * d * d / theta);
    }
    if (m.rho.values[i] > 0.0 && !(r > 0.0)) out.divergent = true;
    out.kinetic += (kin + log_norm * m.rho.values[i] / grid.dv()) * cell;
    out.total += tot * cell;
    const double re = m.rho.values[i];
    if (re > 0.0)
      out.macro += (0.5 * re * u * u / theta - m.momentum.values[i] * u / theta - re * logr) *
                   grid.hx();
  }
  if (out.divergent) out.total = out.macro = INFINITY;
  return out;
}

double relative_entropy_global(const KineticGrid& grid, const std::vector<double>& f, double ubar,
                               double theta) {
  const double M = moments(grid, f).mass;
  const GridField rho(grid.x_grid(), M / grid.period);
  const GridField u(grid.x_grid(), ubar);
  return relative_entropy(grid, f, rho, u, theta).total;
}

double fisher_information(const KineticState& state, const GridField* u_ref) {
  const KineticGrid& g = state.grid;
  const Moments m = moments(state);
  const GridField& u = u_ref ? *u_ref : m.u;
  GridField s = state.strength;
  if (state.weight) s = alignment_fields(state, m).s;
  const double eps = state.params.epsilon;
  const double dv = g.dv();
  double acc = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double coef = 1.0 + eps * s.values[i] / 2.0;
    for (int k = 0; k < g.nv; ++k) {
      const double fv = state.f[g.index(i, k)];
      if (fv <= 0.0) continue;
      const double fl = k > 0 ? state.f[g.index(i, k - 1)] : 0.0;
      const double fr = k + 1 < g.nv ? state.f[g.index(i, k + 1)] : 0.0;
      const double dfdv = (fr - fl) / (2.0 * dv);
      const double r = dfdv + coef * (g.v(k) - u.values[i]) * fv;
      acc += r * r / fv;
    }
  }
  return acc * g.hx() * dv;
}

double modulated_kinetic_energy(const KineticGrid& grid, const std::vector<double>& f,
                                const GridField& u) {
  double acc = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int k = 0; k < grid.nv; ++k) {
      const double d = grid.v(k) - u.values[i];
      acc += d * d * f[grid.index(i, k)];
    }
  return acc * grid.hx() * grid.dv();
}

double mean_velocity(const KineticState& state) {
  const Moments m = moments(state);
  double p = 0.0;
  for (double v : m.momentum.values) p += v;
  return p * state.grid.hx() / m.mass;
}

double momentum_drift(const KineticState& state) {
  const Moments m = moments(state);
  const AlignmentFields a = alignment_fields(state, m);
  double acc = 0.0;
  for (int i = 0; i < state.grid.nx; ++i)
    acc += (a.average.values[i] - m.u.values[i]) * a.s.values[i] * m.rho.values[i];
  return state.params.lambda * acc * state.grid.hx() / m.mass;
}

double boundary_mass_fraction(const KineticState& state) {
  const KineticGrid& g = state.grid;
  double edge = 0.0, total = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int k = 0; k < g.nv; ++k) {
      const double fv = state.f[g.index(i, k)];
      total += fv;
      if (k < 3 || k >= g.nv - 3) edge += fv;
    }
  return total > 0.0 ? edge / total : 0.0;
}

}  // namespace alignlab
