#include "alignlab/micro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alignlab/error.hpp"
#include "alignlab/parallel.hpp"

namespace alignlab {

ParticleEnsemble::ParticleEnsemble(const TorusGeometry& g, std::vector<Vec> xs,
                                   std::vector<Vec> vs, std::vector<double> ms)
    : geom(g), x(std::move(xs)), v(std::move(vs)), m(std::move(ms)) {
  if (x.size() != v.size() || x.size() != m.size())
    throw InvalidArgument("ensemble needs matching position, velocity and mass counts");
  if (x.empty()) throw InvalidArgument("ensemble is empty");
  for (double mi : m)
    if (!(mi > 0.0)) throw InvalidArgument("particle masses must be positive");
  for (auto& p : x) p = wrap(p, geom);
  if (geom.dim == 1)
    for (auto& q : v) q[1] = 0.0;
}

double ParticleEnsemble::total_mass() const {
  double acc = 0.0;
  for (double mi : m) acc += mi;
  return acc;
}

DensityView ParticleEnsemble::density() const { return DensityView::atoms(geom, x, m); }

MicroModel MicroModel::cucker_smale(double lambda, CommunicationKernel k) {
  if (!(lambda > 0.0)) throw InvalidArgument("coupling lambda must be positive");
  MicroModel out;
  out.variant = MicroVariant::CuckerSmale;
  out.lambda = lambda;
  out.kernel = std::move(k);
  return out;
}

MicroModel MicroModel::motsch_tadmor(double lambda, CommunicationKernel k) {
  MicroModel out = cucker_smale(lambda, std::move(k));
  out.variant = MicroVariant::MotschTadmor;
  return out;
}

MicroModel MicroModel::s_model(double lambda, AveragingModel averaging, GridField s) {
  if (!(lambda > 0.0)) throw InvalidArgument("coupling lambda must be positive");
  if (s.min() < 0.0) throw InvalidArgument("strength field must be nonnegative");
  MicroModel out;
  out.variant = MicroVariant::SModel;
  out.lambda = lambda;
  out.kernel = averaging.kernel;
  out.averaging = std::move(averaging);
  out.strength = std::move(s);
  return out;
}

MicroModel MicroModel::w_model(double lambda, CommunicationKernel k, WeightField w) {
  if (!(lambda > 0.0)) throw InvalidArgument("coupling lambda must be positive");
  MicroModel out;
  out.variant = MicroVariant::WModel;
  out.lambda = lambda;
  out.averaging = AveragingModel::favre(k);
  out.kernel = std::move(k);
  out.weight = std::move(w);
  return out;
}

namespace {

// lambda sum_j m_j phi_ij (v_j - v_i), optionally divided by sum_j m_j phi_ij.
std::vector<Vec> pairwise_alignment(const MicroModel& model, const TorusGeometry& geom,
                                    const std::vector<Vec>& x, const std::vector<Vec>& v,
                                    const std::vector<double>& m, bool normalize,
                                    const std::vector<double>* prefactor) {
  const std::size_t n = x.size();
  std::vector<Vec> acc(n);
  parallel_for(n, [&](std::size_t i) {
    Vec a{0.0, 0.0};
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = m[j] * kernel_eval(model.kernel, x[i], x[j], geom);
      den += w;
      a += w * (v[j] - v[i]);
    }
    double scale = model.lambda;
    if (normalize) {
      if (!(den > kDivisionHazard)) {
        std::ostringstream os;
        os << "sum_j m_j phi(x_" << i << " - x_j) vanishes at particle " << i;
        throw DivisionHazard(os.str());
      }
      scale /= den;
    }
    if (prefactor) scale *= (*prefactor)[i];
    acc[i] = scale * a;
  }, 16);
  return acc;
}

std::vector<Vec> accel_at(const MicroModel& model, const TorusGeometry& geom,
                          const std::vector<Vec>& x, const std::vector<Vec>& v,
                          const std::vector<double>& m) {
  switch (model.variant) {
    case MicroVariant::CuckerSmale:
      return pairwise_alignment(model, geom, x, v, m, false, nullptr);
    case MicroVariant::MotschTadmor:
      return pairwise_alignment(model, geom, x, v, m, true, nullptr);
    case MicroVariant::WModel: {
      std::vector<double> w(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) w[i] = sample_field(model.weight->w, x[i]);
      return pairwise_alignment(model, geom, x, v, m, false, &w);
    }
    case MicroVariant::SModel: {
      const DensityView rho = DensityView::atoms(geom, x, m);
      const auto avg = velocity_average(model.averaging, rho, v, x);
      std::vector<Vec> out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (model.lambda * sample_field(*model.strength, x[i])) * (avg[i] - v[i]);
      return out;
    }
  }
  return {};
}

}  // namespace

std::vector<Vec> acceleration(const MicroModel& model, const ParticleEnsemble& ens) {
  return accel_at(model, ens.geom, ens.x, ens.v, ens.m);
}

std::vector<double> particle_strength(const MicroModel& model, const ParticleEnsemble& ens) {
  std::vector<double> s(ens.size(), 1.0);
  switch (model.variant) {
    case MicroVariant::MotschTadmor:
      break;
    case MicroVariant::CuckerSmale:
      s = convolve_density(model.kernel, ens.density(), ens.x);
      break;
    case MicroVariant::WModel: {
      s = convolve_density(model.kernel, ens.density(), ens.x);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] *= sample_field(model.weight->w, ens.x[i]);
      break;
    }
    case MicroVariant::SModel:
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = sample_field(*model.strength, ens.x[i]);
      break;
  }
  return s;
}

GridVelocity field_velocity(const MicroModel& model, const ParticleEnsemble& ens,
                            const GridSpec& grid) {
  const auto nodes = grid.nodes();
  const DensityView rho = ens.density();
  const AveragingModel& avg = model.averaging;
  std::vector<Vec> u(nodes.size());
  if (avg.variant == AveragingVariant::CsMtKernel || avg.variant == AveragingVariant::FavreDirect) {
    // node-parallel evaluation of the kernel quotient
    parallel_for(nodes.size(), [&](std::size_t i) {
      const Vec one[1] = {nodes[i]};
      u[i] = velocity_average(avg, rho, ens.v, one)[0];
    }, 64);
  } else {
    u = velocity_average(avg, rho, ens.v, nodes);
  }
  return GridVelocity::from_vectors(grid, u);
}

double micro_admissible_dt(const MicroModel& model, const ParticleEnsemble& ens) {
  const auto s = particle_strength(model, ens);
  const double smax = *std::max_element(s.begin(), s.end());
  double dt = smax > 0.0 ? 0.1 / (model.lambda * smax) : INFINITY;
  if (model.variant == MicroVariant::SModel)
    dt = std::min(dt, 2.0 * transport_cfl_dt(field_velocity(model, ens, model.strength->grid)));
  if (model.variant == MicroVariant::WModel)
    dt = std::min(dt, 2.0 * transport_cfl_dt(field_velocity(model, ens, model.weight->w.grid)));
  return dt;
}

namespace {

void field_half_step(MicroModel& model, const ParticleEnsemble& ens, double half) {
  if (model.variant == MicroVariant::SModel) {
    const auto vel = field_velocity(model, ens, model.strength->grid);
    model.strength = advance_strength(*model.strength, vel, half);
  } else if (model.variant == MicroVariant::WModel) {
    const auto vel = field_velocity(model, ens, model.weight->w.grid);
    model.weight = advance_weight(*model.weight, vel, half);
  }
}

}  // namespace

MicroStep step(const MicroModel& model, const ParticleEnsemble& ens, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const auto s = particle_strength(model, ens);
  const double smax = *std::max_element(s.begin(), s.end());
  if (smax > 0.0 && dt > 0.1 / (model.lambda * smax) * (1.0 + 1e-12))
    throw StepRejected("particle stability bound violated", 0.1 / (model.lambda * smax));

  MicroStep out{ens, model};
  try {
    field_half_step(out.model, ens, 0.5 * dt);
  } catch (const StepRejected& e) {
    throw StepRejected("field CFL violated", 2.0 * e.admissible_dt());
  }

  const std::size_t n = ens.size();
  const auto& geom = ens.geom;
  auto shifted = [&](const std::vector<Vec>& base, const std::vector<Vec>& d, double c) {
    std::vector<Vec> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = base[i] + c * d[i];
    return r;
  };
  const auto& x0 = ens.x;
  const auto& v0 = ens.v;
  const auto k1x = v0;
  const auto k1v = accel_at(out.model, geom, x0, v0, ens.m);
  const auto x2 = shifted(x0, k1x, 0.5 * dt), v2 = shifted(v0, k1v, 0.5 * dt);
  const auto k2v = accel_at(out.model, geom, x2, v2, ens.m);
  const auto x3 = shifted(x0, v2, 0.5 * dt), v3 = shifted(v0, k2v, 0.5 * dt);
  const auto k3v = accel_at(out.model, geom, x3, v3, ens.m);
  const auto x4 = shifted(x0, v3, dt), v4 = shifted(v0, k3v, dt);
  const auto k4v = accel_at(out.model, geom, x4, v4, ens.m);
  for (std::size_t i = 0; i < n; ++i) {
    out.ensemble.x[i] = wrap(x0[i] + (dt / 6.0) * (k1x[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]), geom);
    out.ensemble.v[i] = v0[i] + (dt / 6.0) * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
  }
  out.ensemble.time = ens.time + dt;

  try {
    field_half_step(out.model, out.ensemble, 0.5 * dt);
  } catch (const StepRejected& e) {
    throw StepRejected("field CFL violated", 2.0 * e.admissible_dt());
  }
  return out;
}

MicroDiagnostics diagnostics(const ParticleEnsemble& ens, double previous_j) {
  MicroDiagnostics d;
  d.t = ens.time;
  const std::size_t n = ens.size();
  double l1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sp = norm(ens.v[i]);
    d.max_speed = std::max(d.max_speed, sp);
    d.total_momentum += ens.m[i] * ens.v[i];
    l1 += ens.m[i] * sp;
    for (std::size_t j = i + 1; j < n; ++j) {
      d.velocity_diameter = std::max(d.velocity_diameter, norm(ens.v[i] - ens.v[j]));
      d.flock_diameter = std::max(d.flock_diameter, periodic_distance(ens.x[i], ens.x[j], ens.geom));
    }
  }
  d.j_running = std::max(previous_j, l1);
  return d;
}

namespace {

MicroDiagnostics observe(const MicroModel& model, const ParticleEnsemble& ens, double prev_j) {
  MicroDiagnostics d = diagnostics(ens, prev_j);
  if (model.strength) d.field_mass = model.strength->integral();
  if (model.weight) d.field_mass = model.weight->w.integral();
  return d;
}

}  // namespace

MicroRun run(const MicroModel& model, const ParticleEnsemble& ens, double T, double dt, int every,
             const MicroObserver& observer) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw InvalidArgument("run needs dt > 0 and T >= 0");
  if (every < 1) every = 1;
  MicroRun out{{}, ens, model, false, {}};
  out.series.push_back(observe(model, ens, 0.0));
  if (observer) observer(model, ens);
  const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
  const double h = steps > 0 ? T / steps : 0.0;
  for (long k = 1; k <= steps; ++k) {
    try {
      MicroStep next = step(out.final_model, out.final_ensemble, h);
      out.final_ensemble = std::move(next.ensemble);
      out.final_model = std::move(next.model);
    } catch (const Error& e) {
      out.aborted = true;
      out.error = e.what();
      break;
    }
    if (k % every == 0 || k == steps) {
      out.series.push_back(observe(out.final_model, out.final_ensemble, out.series.back().j_running));
      if (observer) observer(out.final_model, out.final_ensemble);
    }
  }
  return out;
}

}  // namespace alignlab
