#include "alignlab/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "alignlab/error.hpp"
#include "alignlab/parallel.hpp"

namespace alignlab {

KineticGrid::KineticGrid(double period_, int nx_, int nv_, double vmax_)
    : period(period_), nx(nx_), nv(nv_), vmax(vmax_) {
  if (!(period > 0.0)) throw InvalidGrid("kinetic grid period must be positive");
  if (nx < 4 || nv < 4) throw InvalidGrid("kinetic grid needs at least 4 cells per axis");
  if (!(vmax > 0.0)) throw InvalidGrid("velocity cutoff must be positive");
}

GridSpec KineticGrid::x_grid() const { return GridSpec(TorusGeometry(1, period), nx); }

bool KineticGrid::operator==(const KineticGrid& o) const {
  return period == o.period && nx == o.nx && nv == o.nv && vmax == o.vmax;
}

double KineticState::mass() const {
  double acc = 0.0;
  for (double v : f) acc += v;
  return acc * grid.hx() * grid.dv();
}

KineticState make_kinetic_state(const KineticGrid& grid, std::vector<double> f,
                                const KineticParams& params, AveragingModel averaging,
                                GridField strength, std::optional<WeightField> weight) {
  if (f.size() != grid.size()) throw InvalidGrid("phase density size does not match the grid");
  for (double v : f)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("phase density must be >= 0");
  if (!(strength.grid == grid.x_grid())) throw InvalidGrid("strength must live on the x grid");
  if (weight && !(weight->w.grid == grid.x_grid()))
    throw InvalidGrid("weight must live on the x grid");
  if (!(params.lambda >= 0.0) || !(params.epsilon > 0.0) || !(params.delta > 0.0) ||
      !(params.sigma > 0.0) || !(params.x_cfl > 0.0))
    throw InvalidArgument("kinetic parameters must be positive");
  KineticState s;
  s.grid = grid;
  s.f = std::move(f);
  s.params = params;
  s.averaging = std::move(averaging);
  s.strength = std::move(strength);
  s.weight = std::move(weight);
  return s;
}

std::vector<double> local_maxwellian(const KineticGrid& grid, const GridField& rho,
                                     const GridField& u, double theta) {
  if (!(theta > 0.0)) throw InvalidArgument("Maxwellian variance must be positive");
  std::vector<double> f(grid.size());
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * theta);
  for (int i = 0; i < grid.nx; ++i)
    for (int k = 0; k < grid.nv; ++k) {
      const double d = grid.v(k) - u.values[i];
      f[grid.index(i, k)] = rho.values[i] * c * std::exp(-d * d / (2.0 * theta));
    }
  return f;
}

std::vector<double> monokinetic_ansatz(const KineticGrid& grid, const GridField& rho,
                                       const GridField& u) {
  std::vector<double> f(grid.size(), 0.0);
  const double dv = grid.dv();
  for (int i = 0; i < grid.nx; ++i) {
    const double pos = std::clamp((u.values[i] + grid.vmax) / dv - 0.5, 0.0, grid.nv - 1.0);
    const int k0 = std::min(static_cast<int>(std::floor(pos)), grid.nv - 2);
    const double t = pos - k0;
    f[grid.index(i, k0)] += (1.0 - t) * rho.values[i] / dv;
    f[grid.index(i, k0 + 1)] += t * rho.values[i] / dv;
  }
  return f;
}

Moments moments(const KineticGrid& grid, const std::vector<double>& f) {
  const GridSpec xg = grid.x_grid();
  Moments m{GridField(xg), GridField(xg), GridField(xg), std::vector<bool>(grid.nx, false), 0.0, 0.0};
  const double dv = grid.dv();
  for (int i = 0; i < grid.nx; ++i) {
    double r = 0.0, p = 0.0, e = 0.0;
    for (int k = 0; k < grid.nv; ++k) {
      const double fv = f[grid.index(i, k)];
      const double v = grid.v(k);
      r += fv;
      p += v * fv;
      e += v * v * fv;
    }
    r *= dv;
    p *= dv;
    m.rho.values[i] = r;
    m.momentum.values[i] = p;
    if (r > kDivisionHazard) {
      m.u.values[i] = p / r;
    } else {
      m.vacuum[i] = true;
    }
    m.mass += r * grid.hx();
    m.energy += 0.5 * e * dv * grid.hx();
  }
  return m;
}

Moments moments(const KineticState& state) {
  Moments m = moments(state.grid, state.f);
  m.rho.time = m.u.time = m.momentum.time = state.time;
  return m;
}

AlignmentFields alignment_fields(const KineticState& state, const Moments& m) {
  const GridSpec xg = state.grid.x_grid();
  AlignmentFields out{GridField(xg), GridField(xg), GridField(xg)};
  if (state.weight) {
    const CommunicationKernel& k = state.averaging.kernel;
    const auto rp = GridConvolver(k, xg).apply(m.rho.values);
    for (int i = 0; i < xg.size(); ++i) out.s.values[i] = state.weight->w.values[i] * rp[i];
    out.average = favre_average(k, m.rho, m.u);
  } else {
    out.s = state.strength;
    out.average = average_velocity(state.averaging, m);
  }
  out.u_delta = special_mollified_velocity(m.rho, m.u, Mollifier(state.params.delta, 1));
  return out;
}

GridField average_velocity(const AveragingModel& model, const Moments& m) {
  const GridSpec xg = m.rho.grid;
  GridField out(xg);
  if (model.variant == AveragingVariant::CsMtKernel ||
      model.variant == AveragingVariant::FavreDirect)
    return favre_average(model.kernel, m.rho, m.u);
  const DensityView rho = DensityView::on_grid(m.rho);
  std::vector<Vec> vel(xg.size());
  for (int i = 0; i < xg.size(); ++i) vel[i] = {m.u.values[i], 0.0};
  const auto avg = velocity_average(model, rho, vel, xg.nodes());
  for (int i = 0; i < xg.size(); ++i) out.values[i] = avg[i][0];
  return out;
}

namespace {

// One PFC sweep for rightward shift xi >= 0 on a periodic row.
void pfc_row(std::vector<double>& row, double xi, std::vector<double>& work,
             std::vector<double>& flux) {
  const int n = static_cast<int>(row.size());
  const long m = static_cast<long>(std::floor(xi));
  const double a = xi - m;
  for (int i = 0; i < n; ++i) work[i] = row[((i - m) % n + n) % n];
  if (a == 0.0) {
    row = work;
    return;
  }
  for (int i = 0; i < n; ++i) {
    const double fm = work[(i + n - 1) % n], f0 = work[i], fp = work[(i + 1) % n];
    double ep = 1.0, em = 1.0;
    if (fp > f0) ep = std::min(1.0, 2.0 * f0 / (fp - f0));
    if (f0 < fm) em = std::min(1.0, 2.0 * f0 / (fm - f0));
    flux[i] = a * (f0 + ep / 6.0 * (1.0 - a) * (2.0 - a) * (fp - f0) +
                   em / 6.0 * (1.0 - a) * (1.0 + a) * (f0 - fm));
  }
  for (int i = 0; i < n; ++i) row[i] = work[i] - (flux[i] - flux[(i + n - 1) % n]);
}

}  // namespace

std::vector<double> x_transport(const KineticGrid& grid, const std::vector<double>& f, double dt) {
  std::vector<double> out(f.size());
  const int nx = grid.nx;
  parallel_for(grid.nv, [&](std::size_t k) {
    std::vector<double> row(nx), work(nx), flux(nx);
    const double v = grid.v(static_cast<int>(k));
    for (int i = 0; i < nx; ++i) row[v >= 0.0 ? i : nx - 1 - i] = f[grid.index(i, static_cast<int>(k))];
    pfc_row(row, std::abs(v) * dt / grid.hx(), work, flux);
    for (int i = 0; i < nx; ++i) out[grid.index(i, static_cast<int>(k))] = row[v >= 0.0 ? i : nx - 1 - i];
  }, 8);
  return out;
}

namespace {

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

int reflect(long j, int n) {
  const long p = 2L * n;
  j %= p;
  if (j < 0) j += p;
  return static_cast<int>(j < n ? j : p - 1 - j);
}

}  // namespace

void ou_column(std::span<double> col, const KineticGrid& grid, double kappa, double target,
               double diffusion, double dt) {
  const int n = grid.nv;
  const double dv = grid.dv();
  const double lo = -grid.vmax;
  if (kappa > 0.0) {
    // Exact contraction toward `target`: a cell [a, b] receives the mass of its preimage.
    std::vector<double> slope(n), cum(n + 1, 0.0);
    for (int j = 0; j < n; ++j) {
      const double l = j > 0 ? col[j - 1] : 0.0;
      const double r = j + 1 < n ? col[j + 1] : 0.0;
      slope[j] = minmod(col[j] - l, r - col[j]) / dv;
      cum[j + 1] = cum[j] + col[j] * dv;
    }
    auto C = [&](double v) {
      if (v <= lo) return 0.0;
      if (v >= grid.vmax) return cum[n];
      const int j = std::min(n - 1, static_cast<int>((v - lo) / dv));
      const double e = lo + j * dv, c = e + 0.5 * dv;
      return cum[j] + col[j] * (v - e) + 0.5 * slope[j] * ((v - c) * (v - c) - 0.25 * dv * dv);
    };
    const double stretch = std::exp(std::min(kappa * dt, 460.0));
    auto pre = [&](double v) { return target + (v - target) * stretch; };
    double prev = C(pre(lo));
    std::vector<double> next(n);
    for (int j = 0; j < n; ++j) {
      const double c = C(pre(lo + (j + 1) * dv));
      next[j] = std::max(0.0, c - prev) / dv;
      prev = c;
    }
    // All preimage mass outside [-V, V] is swept into the end cells.
    next[0] += C(pre(lo)) / dv;
    next[n - 1] += (cum[n] - C(pre(grid.vmax))) / dv;
    std::copy(next.begin(), next.end(), col.begin());
  }
  if (diffusion <= 0.0) return;
  const double var =
      kappa > 0.0 ? diffusion / kappa * -std::expm1(-2.0 * kappa * dt) : 2.0 * diffusion * dt;
  if (!(var > 0.0)) return;
  std::vector<double> out(n, 0.0);
  const double sb = std::sqrt(var);
  if (sb < dv) {
    const double a = var / (2.0 * dv * dv);
    for (int j = 0; j < n; ++j) {
      out[j] += (1.0 - 2.0 * a) * col[j];
      out[reflect(j - 1, n)] += a * col[j];
      out[reflect(j + 1, n)] += a * col[j];
    }
  } else {
    const int half = static_cast<int>(std::ceil(6.0 * sb / dv));
    std::vector<double> w(2 * half + 1);
    double total = 0.0;
    for (int d = -half; d <= half; ++d)
      total += (w[d + half] = std::exp(-0.5 * (d * dv) * (d * dv) / var));
    for (double& x : w) x /= total;
    for (int j = 0; j < n; ++j) {
      const double src = col[j];
      if (src == 0.0) continue;
      const int dlo = std::max(-half, -j), dhi = std::min(half, n - 1 - j);
      for (int d = dlo; d <= dhi; ++d) out[j + d] += w[d + half] * src;
      for (int d = -half; d < dlo; ++d) out[reflect(j + d, n)] += w[d + half] * src;
      for (int d = dhi + 1; d <= half; ++d) out[reflect(j + d, n)] += w[d + half] * src;
    }
  }
  std::copy(out.begin(), out.end(), col.begin());
}

void shift_column_mean(std::span<double> col, const KineticGrid& grid, double mean) {
  const int n = grid.nv;
  const double dv = grid.dv();
  for (int pass = 0; pass < 64; ++pass) {
    double mass = 0.0, first = 0.0;
    for (int k = 0; k < n; ++k) {
      mass += col[k];
      first += col[k] * grid.v(k);
    }
    if (!(mass > 0.0)) return;
    const double delta = mean - first / mass;
    if (std::abs(delta) <= 1e-14 * std::max(1.0, grid.vmax)) return;
    // upwind translation by at most one cell; positive and conservative
    const double c = std::min(1.0, std::abs(delta) / dv);
    if (delta > 0.0) {
      for (int k = n - 1; k > 0; --k) {
        const double flux = c * col[k - 1];
        col[k] += flux;
        col[k - 1] -= flux;
      }
    } else {
      for (int k = 0; k + 1 < n; ++k) {
        const double flux = c * col[k + 1];
        col[k] += flux;
        col[k + 1] -= flux;
      }
    }
  }
}

double kinetic_admissible_dt(const KineticState& state) {
  double dt = state.params.x_cfl * state.grid.hx() / state.grid.vmax;
  const Moments m = moments(state);
  const AlignmentFields a = alignment_fields(state, m);
  dt = std::min(dt, 2.0 * transport_cfl_dt(GridVelocity::from_scalar(a.average)));
  return dt;
}

namespace {

void field_half_step(KineticState& st, double half) {
  const Moments m = moments(st);
  const AlignmentFields a = alignment_fields(st, m);
  const GridVelocity vel = GridVelocity::from_scalar(a.average);
  try {
    if (st.weight) {
      st.weight = advance_weight(*st.weight, vel, half);
    } else {
      st.strength = advance_strength(st.strength, vel, half);
    }
  } catch (const StepRejected& e) {
    throw StepRejected("kinetic field transport CFL violated", 2.0 * e.admissible_dt());
  }
}

void velocity_substep(KineticState& st, KineticRegime regime, double dt) {
  const Moments m = moments(st);
  const AlignmentFields a = alignment_fields(st, m);
  const KineticParams& p = st.params;
  const KineticGrid& g = st.grid;
  parallel_for(g.nx, [&](std::size_t i) {
    const double s = a.s.values[i];
    const double avg = a.average.values[i];
    double kappa = p.lambda * s, target = avg, diffusion = 0.0;
    switch (regime) {
      case KineticRegime::Vlasov:
        break;
      case KineticRegime::Monokinetic:
      case KineticRegime::Maxwellian: {
        // The penalty pulls toward u_delta = m + d with m the column mean. Keeping m live and
        // freezing only d makes the mean relax at the alignment rate whatever the stiffness:
        // m' = -lambda s (m - [u]) + d / eps, and fluctuations decay at lambda s + 1/eps.
        const double stiff = 1.0 / p.epsilon;
        const double mean = m.vacuum[i] ? a.u_delta.values[i] : m.u.values[i];
        const double d = a.u_delta.values[i] - mean;
        double mean_next = mean + d * stiff * dt;
        if (kappa > 0.0) {
          const double limit = avg + d * stiff / kappa;
          mean_next = limit + (mean - limit) * std::exp(-kappa * dt);
        }
        kappa += stiff;
        const double contraction = std::exp(-kappa * dt);
        target = (mean_next - contraction * mean) / (1.0 - contraction);
        if (regime == KineticRegime::Maxwellian) diffusion = stiff;
        break;
      }
      case KineticRegime::FokkerPlanckAlignment:
        diffusion = p.sigma * kappa;
        break;
    }
    std::span<double> col(st.f.data() + g.index(static_cast<int>(i), 0), g.nv);
    ou_column(col, g, kappa, target, diffusion, dt);
    // Cell averages cannot hold a sub-cell drift of a concentrated column; restore the exact
    // mean of the linear drift.
    if (!m.vacuum[i] && kappa > 0.0)
      shift_column_mean(col, g, target + (m.u.values[i] - target) * std::exp(-kappa * dt));
  }, 4);
}

}  // namespace

KineticState kinetic_step(const KineticState& state, KineticRegime regime, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const double xlimit = state.params.x_cfl * state.grid.hx() / state.grid.vmax;
  if (dt > xlimit * (1.0 + 1e-12)) throw StepRejected("kinetic x CFL violated", xlimit);
  if (regime == KineticRegime::FokkerPlanckAlignment && !state.weight)
    throw PreconditionError("Fokker-Planck-alignment step needs a weight field");
  KineticState st = state;
  field_half_step(st, 0.5 * dt);
  st.f = x_transport(st.grid, st.f, 0.5 * dt);
  velocity_substep(st, regime, dt);
  st.f = x_transport(st.grid, st.f, 0.5 * dt);
  field_half_step(st, 0.5 * dt);
  st.time = state.time + dt;
  st.strength.time = st.time;
  if (st.weight) st.weight->w.time = st.time;
  for (double v : st.f)
    if (!std::isfinite(v)) throw BlowUpError("non-finite phase density");
  return st;
}

KineticState vlasov_step(const KineticState& s, double dt) {
  return kinetic_step(s, KineticRegime::Vlasov, dt);
}
KineticState monokinetic_step(const KineticState& s, double dt) {
  return kinetic_step(s, KineticRegime::Monokinetic, dt);
}
KineticState maxwellian_step(const KineticState& s, double dt) {
  return kinetic_step(s, KineticRegime::Maxwellian, dt);
}
KineticState fpa_step(const KineticState& s, double dt) {
  return kinetic_step(s, KineticRegime::FokkerPlanckAlignment, dt);
}

}  // namespace alignlab
