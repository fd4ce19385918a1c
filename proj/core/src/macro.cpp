#include "alignlab/macro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alignlab/error.hpp"

namespace alignlab {

MacroModel::MacroModel(AveragingModel averaging, const GridSpec& grid, double lambda)
    : averaging_(std::move(averaging)),
      grid_(grid),
      lambda_(lambda),
      spectral_(std::make_shared<Spectral1D>(grid.n[0], grid.geom.period[0])) {
  if (grid.geom.dim != 1) throw InvalidGrid("macro solver is one-dimensional");
  if (!(lambda >= 0.0)) throw InvalidArgument("coupling lambda must be nonnegative");
}

std::vector<double> MacroModel::average(const GridField& rho, const GridField& u) const {
  if (averaging_.variant == AveragingVariant::CsMtKernel ||
      averaging_.variant == AveragingVariant::FavreDirect)
    return favre_average(averaging_.kernel, rho, u).values;
  const DensityView view = DensityView::on_grid(rho);
  std::vector<Vec> vel(u.values.size());
  for (std::size_t i = 0; i < vel.size(); ++i) vel[i] = {u.values[i], 0.0};
  const auto avg = velocity_average(averaging_, view, vel, grid_.nodes());
  std::vector<double> out(avg.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = avg[i][0];
  return out;
}

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double vacuum_threshold(const MacroState& s, const MacroModel& model) {
  return model.vacuum_fraction * s.rho.integral() / s.rho.grid.geom.period[0];
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw BlowUpError(std::string("non-finite ") + what);
}

}  // namespace

MacroState make_macro_state(GridField rho, GridField s, GridField u, Pressure pressure,
                            const MacroModel& model) {
  if (!(rho.grid == model.grid()) || !(s.grid == model.grid()) || !(u.grid == model.grid()))
    throw InvalidGrid("macro fields must live on the model grid");
  if (!(rho.min() > 0.0)) throw VacuumError("macro density must be positive");
  if (s.min() < 0.0) throw InvalidArgument("strength must be nonnegative");
  MacroState st{std::move(rho), std::move(s), std::move(u), pressure, 0.0, 0.0};
  st.initial_max_gradient = max_abs(model.spectral().derivative(st.u.values));
  return st;
}

MacroTendency macro_rhs(const MacroState& st, const MacroModel& model) {
  const Spectral1D& D = model.spectral();
  const std::size_t n = st.rho.values.size();
  check_finite(st.rho.values, "density");
  check_finite(st.u.values, "velocity");
  check_finite(st.s.values, "strength");
  const double vac = vacuum_threshold(st, model);
  for (std::size_t i = 0; i < n; ++i)
    if (st.rho.values[i] < vac) {
      std::ostringstream os;
      os << "density " << st.rho.values[i] << " below the vacuum threshold at node " << i;
      throw VacuumError(os.str());
    }
  const auto avg = model.average(st.rho, st.u);
  std::vector<double> mass_flux(n), s_flux(n), q_flux(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = st.rho.values[i], u = st.u.values[i];
    mass_flux[i] = r * u;
    s_flux[i] = st.s.values[i] * avg[i];
    q_flux[i] = st.pressure == Pressure::Pressureless ? 0.5 * u * u : r * u * u + r;
  }
  MacroTendency t{D.derivative(mass_flux), D.derivative(s_flux), D.derivative(q_flux)};
  for (std::size_t i = 0; i < n; ++i) {
    const double force = model.lambda() * st.s.values[i] * (avg[i] - st.u.values[i]);
    t.rho[i] = -t.rho[i];
    t.s[i] = -t.s[i];
    t.q[i] = -t.q[i] + (st.pressure == Pressure::Pressureless ? force : st.rho.values[i] * force);
  }
  return t;
}

double macro_admissible_dt(const MacroState& st, const MacroModel& model) {
  const double h = st.rho.grid.h();
  const double c = st.pressure == Pressure::Isentropic ? 1.0 : 0.0;
  const double speed = max_abs(st.u.values) + c;
  double dt = speed > 0.0 ? model.cfl * h / speed : INFINITY;
  const double smax = st.s.max();
  if (smax > 0.0 && model.lambda() > 0.0) dt = std::min(dt, 1.0 / (model.lambda() * smax));
  return dt;
}

namespace {

MacroState advance(const MacroState& st, const MacroTendency& t, double c) {
  MacroState out = st;
  const std::size_t n = st.rho.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.rho.values[i] += c * t.rho[i];
    out.s.values[i] += c * t.s[i];
    if (st.pressure == Pressure::Pressureless) {
      out.u.values[i] += c * t.q[i];
    } else {
      const double m = st.rho.values[i] * st.u.values[i] + c * t.q[i];
      out.u.values[i] = m / out.rho.values[i];
    }
  }
  return out;
}

}  // namespace

MacroState macro_step(const MacroState& st, const MacroModel& model, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const double limit = macro_admissible_dt(st, model);
  if (dt > limit * (1.0 + 1e-12)) throw StepRejected("macro CFL violated", limit);
  const MacroTendency k1 = macro_rhs(st, model);
  const MacroTendency k2 = macro_rhs(advance(st, k1, 0.5 * dt), model);
  const MacroTendency k3 = macro_rhs(advance(st, k2, 0.5 * dt), model);
  const MacroTendency k4 = macro_rhs(advance(st, k3, dt), model);
  const std::size_t n = st.rho.values.size();
  MacroTendency sum{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    sum.rho[i] = (k1.rho[i] + 2.0 * k2.rho[i] + 2.0 * k3.rho[i] + k4.rho[i]) / 6.0;
    sum.s[i] = (k1.s[i] + 2.0 * k2.s[i] + 2.0 * k3.s[i] + k4.s[i]) / 6.0;
    sum.q[i] = (k1.q[i] + 2.0 * k2.q[i] + 2.0 * k3.q[i] + k4.q[i]) / 6.0;
  }
  MacroState out = advance(st, sum, dt);
  out.time = st.time + dt;
  out.rho.time = out.s.time = out.u.time = out.time;

  check_finite(out.rho.values, "density");
  check_finite(out.u.values, "velocity");
  check_finite(out.s.values, "strength");
  const double vac = vacuum_threshold(out, model);
  if (out.rho.min() < vac) throw VacuumError("density crossed the vacuum threshold");
  const double grad = max_abs(model.spectral().derivative(out.u.values));
  const double g0 = std::max(st.initial_max_gradient, 1e-12);
  if (grad > model.blowup_factor * g0) {
    std::ostringstream os;
    os << "velocity gradient " << grad << " exceeds " << model.blowup_factor
       << " times its initial value";
    throw BlowUpError(os.str());
  }
  if (out.u.max() - out.u.min() > 1e-8) {
    const double tail = model.spectral().tail_fraction(out.u.values);
    if (tail > model.tail_threshold) {
      std::ostringstream os;
      os << "velocity no longer resolved: spectral tail fraction " << tail;
      throw BlowUpError(os.str());
    }
  }
  return out;
}

EQuantity e_quantity(const MacroState& st, const MacroModel& model) {
  const auto ux = model.spectral().raw_derivative(st.u.values);
  EQuantity q{GridField(st.u.grid), 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < ux.size(); ++i) q.e.values[i] = ux[i] + st.s.values[i];
  q.min = q.e.min();
  q.max = q.e.max();
  q.integral = q.e.integral();
  return q;
}

ThresholdResult threshold_probe(const MacroState& initial, const MacroModel& model, double T,
                                double dt, int every) {
  ThresholdResult r;
  r.last_state = initial;
  const EQuantity e0 = e_quantity(initial, model);
  const double e_scale = std::max(1.0, std::abs(e0.integral));
  r.min_e = e0.min;
  auto sample = [&](const MacroState& s) {
    const EQuantity e = e_quantity(s, model);
    r.min_e = std::min(r.min_e, e.min);
    r.max_e_integral_drift =
        std::max(r.max_e_integral_drift, std::abs(e.integral - e0.integral) / e_scale);
    return ThresholdSample{s.time,
                           e.min,
                           max_abs(model.spectral().derivative(s.u.values)),
                           e.integral,
                           s.rho.integral(),
                           s.s.integral(),
                           s.u.max() - s.u.min()};
  };
  r.series.push_back(sample(initial));
  MacroState cur = initial;
  long k = 0;
  while (cur.time < T - 1e-12) {
    const double h = std::min({dt, T - cur.time, macro_admissible_dt(cur, model)});
    try {
      cur = macro_step(cur, model, h);
    } catch (const BlowUpError& e) {
      r.regular = false;
      r.blowup_time = cur.time + h;
      r.reason = e.what();
      break;
    } catch (const VacuumError& e) {
      r.regular = false;
      r.blowup_time = cur.time + h;
      r.reason = e.what();
      break;
    }
    ++k;
    const ThresholdSample smp = sample(cur);
    if (k % every == 0 || cur.time >= T - 1e-12) r.series.push_back(smp);
  }
  if (!r.regular && r.series.back().t != cur.time) r.series.push_back(sample(cur));
  r.last_state = cur;
  return r;
}

}  // namespace alignlab
