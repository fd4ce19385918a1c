// Kinetic studies: monokinetic and Maxwellian limits, relaxation, single kinetic runs.

#include <algorithm>
#include <functional>
#include <limits>

#include "alignlab/experiments.hpp"
#include "alignlab/fitting.hpp"
#include "alignlab/kinetic.hpp"
#include "alignlab/macro.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/parallel.hpp"
#include "exp_common.hpp"

namespace alignlab {

using namespace detail;

namespace {

KineticRegime regime_from(const std::string& name) {
  if (name == "vlasov") return KineticRegime::Vlasov;
  if (name == "monokinetic") return KineticRegime::Monokinetic;
  if (name == "fpa") return KineticRegime::FokkerPlanckAlignment;
  return KineticRegime::Maxwellian;
}

KineticGrid kinetic_grid(const KineticConfig& k) { return KineticGrid(1.0, k.nx, k.nv, k.vmax); }

/// Step size: the configured dt (or the admissible one when 0), shrunk to divide T evenly.
std::pair<long, double> kinetic_steps(const KineticState& s, const KineticConfig& k) {
  double dt = kinetic_admissible_dt(s);
  if (k.dt > 0.0) dt = std::min(dt, k.dt);
  const long n = std::max(1L, static_cast<long>(std::ceil(k.t_end / dt - 1e-9)));
  return {n, k.t_end / n};
}

using KineticObserver = std::function<void(const KineticState&)>;

KineticState integrate(KineticState s, KineticRegime regime, const KineticConfig& k, int every,
                       const KineticObserver& observe) {
  const auto [steps, h] = kinetic_steps(s, k);
  if (observe) observe(s);
  for (long n = 1; n <= steps; ++n) {
    s = kinetic_step(s, regime, h);
    if (observe && (n % every == 0 || n == steps)) observe(s);
  }
  return s;
}

MacroState integrate_macro(MacroState s, const MacroModel& model, double T, double dt) {
  const long n = std::max(1L, static_cast<long>(std::ceil(T / dt - 1e-9)));
  const double h = T / n;
  for (long k = 0; k < n; ++k) s = macro_step(s, model, h);
  return s;
}

double sup_distance(const GridField& a, const GridField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

struct LimitSetup {
  KineticGrid grid;
  GridSpec xg;
  CommunicationKernel kernel;
  AveragingModel averaging;
  GridField rho0, u0, s0;
};

LimitSetup limit_setup(const RunConfig& c) {
  const KineticGrid g = kinetic_grid(c.kinetic);
  const GridSpec xg = g.x_grid();
  CommunicationKernel k = make_kernel(c.kernel, xg.geom);
  AveragingModel avg = make_averaging(c.averaging, k);
  GridField rho0 = cosine_profile(xg, c.kinetic.rho_amplitude);
  GridField u0 = sine_profile(xg, c.kinetic.u_amplitude);
  // s0 = w0 rho0_phi with w0 = 1 + w_variation sin(2 pi x)
  const auto rp = GridConvolver(k, xg).apply(rho0.values);
  GridField s0(xg);
  for (int i = 0; i < xg.size(); ++i)
    s0.values[i] = (1.0 + c.kinetic.w_variation * std::sin(kTwoPi * xg.node(i)[0])) * rp[i];
  return {g, xg, std::move(k), std::move(avg), std::move(rho0), std::move(u0), std::move(s0)};
}

/// Bulk velocity of the ill-prepared kinetic data.
GridField perturbed_velocity(const LimitSetup& L, double amplitude, double eps) {
  GridField u = L.u0;
  for (int i = 0; i < L.xg.size(); ++i)
    u.values[i] += amplitude * std::sqrt(eps) * std::cos(kTwoPi * L.xg.node(i)[0]);
  return u;
}

std::vector<double> deltas_for(const KineticConfig& k) {
  std::vector<double> d;
  for (double e : k.epsilons) d.push_back(std::pow(e, k.delta_exponent));
  return d;
}

}  // namespace

// ---- monokinetic limit ----------------------------------------------------------------------

ExperimentReport exp_monokinetic(const RunConfig& c) {
  const auto& k = c.kinetic;
  ExperimentReport rep;
  rep.experiment = "monokinetic";
  rep.seed = c.experiment.seed;
  const LimitSetup L = limit_setup(c);
  const MacroModel model(L.averaging, L.xg, k.lambda);
  const MacroState m0 = make_macro_state(L.rho0, L.s0, L.u0, Pressure::Pressureless, model);
  if (e_quantity(m0, model).min < 0.0)
    throw PreconditionError("macro reference data must satisfy e0 >= 0 to stay smooth");
  const MacroState mT = integrate_macro(m0, model, k.t_end, c.macro.dt);
  const auto deltas = deltas_for(k);

  struct Point {
    MonokineticDeviation dev;
    double strength_sup;
  };
  auto solve = [&](double eps, double delta, double amplitude) {
    KineticParams p{k.lambda, eps, delta, k.sigma, k.x_cfl};
    const auto f0 = monokinetic_ansatz(L.grid, L.rho0, perturbed_velocity(L, amplitude, eps));
    KineticState s = make_kinetic_state(L.grid, f0, p, L.averaging, L.s0);
    s = integrate(std::move(s), KineticRegime::Monokinetic, k, 1 << 30, {});
    return Point{monokinetic_deviation(L.grid, s.f, mT.rho, mT.u), sup_distance(s.strength, mT.s)};
  };
  std::vector<std::size_t> idx(k.epsilons.size() + 1);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto pts = parallel_map(idx, [&](std::size_t i) {
    if (i < k.epsilons.size()) return solve(k.epsilons[i], deltas[i], k.ill_prepared);
    return solve(k.epsilons.back(), deltas.back(), 0.0);  // well-prepared calibration
  });

  Table t{"sweep", {"epsilon", "delta", "modulated_energy", "w2_spatial", "deviation", "rate_bound", "strength_sup"}, {}};
  std::vector<double> eps, dev, bound, ssup;
  for (std::size_t i = 0; i < k.epsilons.size(); ++i) {
    const double e = k.epsilons[i], d = deltas[i];
    const double b = std::sqrt(e + d / e);
    t.add({e, d, pts[i].dev.modulated_energy, pts[i].dev.w2_spatial, pts[i].dev.combined, b, pts[i].strength_sup});
    eps.push_back(e);
    dev.push_back(pts[i].dev.combined);
    bound.push_back(b);
    ssup.push_back(pts[i].strength_sup);
  }
  rep.tables.push_back(t);

  // The sweep runs from large to small epsilon, so "decreasing in epsilon" is a decreasing column.
  rep.check("deviation decreasing in epsilon", strictly_decreasing(dev), dev.back(), dev.front());
  const PowerFit pf = power_fit(eps, dev);
  const auto& tol = c.experiment.tol;
  rep.metric("deviation_exponent", pf.exponent);
  rep.metric("deviation_fit_residual", pf.line.relative_residual);
  rep.fit_check("deviation exponent in range", pf.exponent >= tol.exponent_min && pf.exponent <= tol.exponent_max,
                pf.line.relative_residual, tol.residual, pf.exponent, tol.exponent_min,
                "fitted exponent of deviation vs epsilon; upper limit " + format_double(tol.exponent_max));
  const ScaleFit sf = scale_fit(bound, dev);
  rep.metric("rate_constant", sf.scale);
  rep.metric("rate_constant_residual", sf.relative_residual);
  rep.check("strength sup-distance decreasing in epsilon", strictly_decreasing(ssup), ssup.back(), ssup.front());

  const Point& cal = pts.back();
  const double floor_dev = std::sqrt(modulated_kinetic_energy(
      L.grid, monokinetic_ansatz(L.grid, mT.rho, mT.u), mT.u));
  rep.metric("ansatz_deviation", cal.dev.combined);
  rep.metric("grid_floor", floor_dev);
  const double cal_ratio = cal.dev.combined / std::max(floor_dev, 1e-300);
  rep.check("well-prepared deviation within twice the grid floor", cal_ratio < 2.0, cal_ratio, 2.0,
            "ansatz data at the smallest epsilon");

  LinePlot p{"Monokinetic deviation", "epsilon", "deviation", true, true, {}};
  p.series.push_back({"sqrt(e + W2^2)", eps, dev});
  std::vector<double> scaled(bound.size());
  for (std::size_t i = 0; i < bound.size(); ++i) scaled[i] = sf.scale * bound[i];
  p.series.push_back({"C sqrt(eps + delta/eps)", eps, scaled});
  p.series.push_back({"sup |s_eps - s|", eps, ssup});
  rep.plots.push_back({"deviation_vs_epsilon", p});
  rep.checkpoints.push_back({"macro_final", macro_checkpoint(mT)});
  return rep;
}

// ---- Maxwellian limit -----------------------------------------------------------------------

ExperimentReport exp_maxwellian(const RunConfig& c) {
  const auto& k = c.kinetic;
  ExperimentReport rep;
  rep.experiment = "maxwellian";
  rep.seed = c.experiment.seed;
  if (c.averaging.variant != "favre") throw PreconditionError("Maxwellian study needs favre (w-model) averaging");
  const LimitSetup L = limit_setup(c);
  if (!(L.kernel.c0() > 0.0)) throw PreconditionError("Maxwellian study needs a kernel bounded below (c0 > 0)");
  const MacroModel model(L.averaging, L.xg, k.lambda);
  const MacroState m0 = make_macro_state(L.rho0, L.s0, L.u0, Pressure::Isentropic, model);
  const auto deltas = deltas_for(k);

  // macro reference sampled on the kinetic observation times
  const double dt_macro = c.macro.dt;
  struct Run {
    double h0 = 0.0, hT = 0.0, hsup = 0.0, heps_sup = 0.0;
    Table series;
  };
  auto solve = [&](double eps, double delta, double amplitude, const std::string& name) {
    KineticParams p{k.lambda, eps, delta, k.sigma, k.x_cfl};
    const auto f0 = local_maxwellian(L.grid, L.rho0, perturbed_velocity(L, amplitude, eps), 1.0);
    KineticState s = make_kinetic_state(L.grid, f0, p, L.averaging, L.s0);
    Run r;
    r.series = Table{name, {"t", "H", "H_eps", "G_eps", "mass"}, {}};
    MacroState ref = m0;
    auto observe = [&](const KineticState& st) {
      if (st.time > ref.time) ref = integrate_macro(ref, model, st.time - ref.time, dt_macro);
      const EntropySplit e = relative_entropy(L.grid, st.f, ref.rho, ref.u, 1.0);
      if (r.series.rows.empty()) r.h0 = e.total;
      r.hT = e.total;
      r.hsup = std::max(r.hsup, e.total);
      r.heps_sup = std::max(r.heps_sup, std::abs(e.kinetic));
      r.series.add({st.time, e.total, e.kinetic, e.macro, st.mass()});
    };
    integrate(std::move(s), KineticRegime::Maxwellian, k, k.every, observe);
    return r;
  };
  std::vector<std::size_t> idx(k.epsilons.size() + 1);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto runs = parallel_map(idx, [&](std::size_t i) {
    if (i < k.epsilons.size())
      return solve(k.epsilons[i], deltas[i], k.ill_prepared, "series_eps_" + format_double(k.epsilons[i]));
    return solve(k.epsilons.back(), deltas.back(), 0.0, "series_well_prepared");
  });

  Table t{"sweep", {"epsilon", "delta", "H0", "H_T", "sup_H", "sup_abs_H_eps"}, {}};
  std::vector<double> eps, hT, heps;
  for (std::size_t i = 0; i < k.epsilons.size(); ++i) {
    t.add({k.epsilons[i], deltas[i], runs[i].h0, runs[i].hT, runs[i].hsup, runs[i].heps_sup});
    eps.push_back(k.epsilons[i]);
    hT.push_back(runs[i].hT);
    heps.push_back(runs[i].heps_sup);
  }
  rep.tables.push_back(t);
  for (const auto& r : runs) rep.tables.push_back(r.series);

  rep.check("H(f|mu) at T decreasing in epsilon", strictly_decreasing(hT), hT.back(), hT.front());
  rep.check("H at smallest epsilon below initial H of largest epsilon", hT.back() < runs[0].h0, hT.back(), runs[0].h0);
  const double growth = heps.back() / std::max(heps.front(), 1e-300);
  const double hmax = *std::max_element(heps.begin(), heps.end());
  const double hmin = *std::min_element(heps.begin(), heps.end());
  rep.metric("H_eps_sup_max", hmax);
  rep.metric("H_eps_sup_min", hmin);
  rep.check("H_eps uniformly bounded across the sweep", growth <= c.experiment.tol.entropy_growth, growth,
            c.experiment.tol.entropy_growth, "sup_t |H_eps| at smallest epsilon over that at largest");
  const Run& wp = runs.back();
  rep.metric("well_prepared_sup_H", wp.hsup);
  rep.info("well-prepared sup H", wp.hsup, "f0 equal to the macro Maxwellian at the smallest epsilon");

  LinePlot p{"Relative entropy at T", "epsilon", "H(f|mu)", true, true, {}};
  p.series.push_back({"H(T)", eps, hT});
  rep.plots.push_back({"entropy_vs_epsilon", p});
  LinePlot q{"Relative entropy in time", "t", "H(f|mu)", false, true, {}};
  for (std::size_t i = 0; i < k.epsilons.size(); ++i)
    q.series.push_back({"eps=" + format_double(k.epsilons[i]), runs[i].series.column("t"), runs[i].series.column("H"), false});
  rep.plots.push_back({"entropy_in_time", q});
  return rep;
}

// ---- relaxation -----------------------------------------------------------------------------

namespace {

struct RelaxRun {
  Table series;
  ExponentialFit fit;
  double drift_max = 0.0;
  KineticState final_state;
};

RelaxRun relax(const RunConfig& c, const CommunicationKernel& kernel, const GridField& rho0,
               const GridField& u0, const GridField& w0, double sigma, bool equilibrium,
               const std::string& name) {
  const auto& k = c.kinetic;
  const KineticGrid g = kinetic_grid(k);
  KineticParams p{k.lambda, k.epsilon, k.delta, sigma, k.x_cfl};
  const GridSpec xg = g.x_grid();
  std::vector<double> f0;
  if (equilibrium) {
    f0 = local_maxwellian(g, GridField(xg, rho0.integral() / xg.geom.period[0]), GridField(xg, 0.0), sigma);
  } else {
    f0 = local_maxwellian(g, rho0, u0, sigma);
  }
  const AveragingModel avg = AveragingModel::favre(kernel);
  KineticState s = make_kinetic_state(g, std::move(f0), p, avg, GridField(xg, 1.0), WeightField(w0));
  RelaxRun r;
  r.series = Table{name, {"t", "H", "ubar", "drift", "fisher"}, {}};
  auto observe = [&](const KineticState& st) {
    const double ub = mean_velocity(st);
    const double drift = momentum_drift(st);
    r.drift_max = std::max(r.drift_max, std::abs(drift));
    r.series.add({st.time, relative_entropy_global(g, st.f, ub, sigma), ub, drift, fisher_information(st)});
  };
  r.final_state = integrate(std::move(s), KineticRegime::FokkerPlanckAlignment, k, k.every, observe);
  if (!equilibrium) {
    const auto t = r.series.column("t");
    const auto h = r.series.column("H");
    // H settles on the discrete equilibrium, not on zero, so the excess over that floor is fitted.
    // The window skips the fast alignment of the bulk velocity and stops well above round-off.
    const double floor = h.back();
    const double h0 = h.front() - floor;
    std::vector<double> tt, hh;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double excess = h[i] - floor;
      if (excess <= 1e-6 * h0) break;
      if (excess <= 1e-3 * h0) {
        tt.push_back(t[i]);
        hh.push_back(excess);
      }
    }
    if (tt.size() < 3) throw Error("relaxation run left too few positive entropy samples to fit");
    r.fit = exponential_fit(tt, hh);
  }
  return r;
}

}  // namespace

ExperimentReport exp_relaxation(const RunConfig& c) {
  const auto& k = c.kinetic;
  ExperimentReport rep;
  rep.experiment = "relaxation";
  rep.seed = c.experiment.seed;
  if (c.kernel.family != "bochner")
    throw PreconditionError("relaxation study needs a Bochner kernel (kernel.family = \"bochner\")");
  const TorusGeometry geom(1, 1.0);
  const CommunicationKernel kernel = make_kernel(c.kernel, geom);
  const GridSpec xg = kinetic_grid(k).x_grid();
  const GridField rho0 = cosine_profile(xg, k.rho_amplitude);
  const GridField u0 = sine_profile(xg, k.u_amplitude);
  const GridField w0 = GridField::from_function(xg, [&](const Vec& x) {
    return 1.0 + k.w_variation * std::cos(kTwoPi * x[0]);
  });
  const GridField w1(xg, 1.0);
  // small weight variation: (sup w - inf w) / inf(w)^2 against M^3
  const double M = rho0.integral();
  const double variation = (w0.max() - w0.min()) / (w0.min() * w0.min());
  rep.metric("weight_variation", variation);
  rep.metric("mass_cubed", M * M * M);
  const SpectralGapResult gap = spectral_gap_estimate(kernel, rho0, w0);
  rep.metric("spectral_gap", gap.epsilon0);
  rep.check("spectral gap estimate positive", gap.epsilon0 > 0.0, gap.epsilon0, 0.0);

  struct Job {
    double sigma;
    int kind;  // 0 varying w, 1 constant w, 2 equilibrium start
  };
  std::vector<Job> jobs;
  for (double s : k.sigmas) jobs.push_back({s, 0});
  jobs.push_back({k.sigmas.back(), 1});
  jobs.push_back({k.sigmas.back(), 2});
  const auto runs = parallel_map(jobs, [&](const Job& j) {
    const std::string name = (j.kind == 0 ? "series_sigma_" : j.kind == 1 ? "series_const_w_sigma_" : "series_equilibrium_sigma_") +
                             format_double(j.sigma);
    return relax(c, kernel, rho0, u0, j.kind == 1 ? w1 : w0, j.sigma, j.kind == 2, name);
  });

  const auto& tol = c.experiment.tol;
  Table t{"rates", {"sigma", "rate", "fit_residual", "sigma_times_gap", "max_abs_drift"}, {}};
  std::vector<double> sig, rates;
  for (std::size_t i = 0; i < k.sigmas.size(); ++i) {
    const auto& r = runs[i];
    t.add({k.sigmas[i], r.fit.rate, r.fit.line.relative_residual, k.sigmas[i] * gap.epsilon0, r.drift_max});
    sig.push_back(k.sigmas[i]);
    rates.push_back(r.fit.rate);
    rep.fit_check("exponential decay at sigma=" + format_double(k.sigmas[i]), r.fit.rate > 0.0,
                  r.fit.line.relative_residual, tol.residual, r.fit.rate, 0.0);
  }
  rep.tables.push_back(t);
  bool increasing = true;
  for (std::size_t i = 1; i < rates.size(); ++i)
    if ((rates[i] - rates[i - 1]) * (sig[i] - sig[i - 1]) <= 0.0) increasing = false;
  double worst_residual = 0.0;
  for (std::size_t i = 0; i < k.sigmas.size(); ++i)
    worst_residual = std::max(worst_residual, runs[i].fit.line.relative_residual);
  rep.fit_check("decay rate increasing with sigma", increasing, worst_residual, tol.residual, rates.back(), rates.front());

  const RelaxRun& cw = runs[k.sigmas.size()];
  const RelaxRun& eq = runs[k.sigmas.size() + 1];
  rep.metric("rate_constant_w", cw.fit.rate);
  rep.metric("rate_varying_w", rates.back());
  rep.info("constant-w rate over varying-w rate", cw.fit.rate / rates.back(), "same sigma, w == 1 control");
  const auto eqh = eq.series.column("H");
  const double eq_sup = *std::max_element(eqh.begin(), eqh.end());
  rep.metric("equilibrium_sup_H", eq_sup);
  rep.info("equilibrium start sup H", eq_sup, "f0 = global Maxwellian");

  LinePlot p{"Relative entropy to the global Maxwellian", "t", "H", false, true, {}};
  for (const auto& r : runs) {
    rep.tables.push_back(r.series);
    p.series.push_back({r.series.name, r.series.column("t"), r.series.column("H"), false});
  }
  rep.plots.push_back({"entropy_decay", p});
  rep.checkpoints.push_back({"final_sigma_" + format_double(k.sigmas.back()), kinetic_checkpoint(runs[k.sigmas.size() - 1].final_state)});
  return rep;
}

// ---- single kinetic run ---------------------------------------------------------------------

ExperimentReport simulate_kinetic(const RunConfig& c) {
  const auto& k = c.kinetic;
  ExperimentReport rep;
  rep.experiment = "simulate-kinetic";
  rep.seed = c.experiment.seed;
  const KineticRegime regime = regime_from(k.regime);
  const LimitSetup L = limit_setup(c);
  const double theta = regime == KineticRegime::FokkerPlanckAlignment ? k.sigma : 1.0;
  std::vector<double> f0 = regime == KineticRegime::Monokinetic ? monokinetic_ansatz(L.grid, L.rho0, L.u0)
                                                                 : local_maxwellian(L.grid, L.rho0, L.u0, theta);
  KineticParams p{k.lambda, k.epsilon, k.delta, k.sigma, k.x_cfl};
  std::optional<WeightField> w;
  AveragingModel avg = L.averaging;
  if (regime == KineticRegime::FokkerPlanckAlignment) {
    w = WeightField(GridField::from_function(L.xg, [&](const Vec& x) {
      return 1.0 + k.w_variation * std::sin(kTwoPi * x[0]);
    }));
    avg = AveragingModel::favre(L.kernel);
  }
  KineticState s0 = make_kinetic_state(L.grid, std::move(f0), p, avg, L.s0, w);
  const double m0 = s0.mass();
  Table t{"diagnostics", {"t", "mass", "E_eps", "e_f_u", "H", "H_eps", "G_eps", "I_eps", "ubar", "drift"}, {}};
  double mass_drift = 0.0;
  auto observe = [&](const KineticState& st) {
    const Moments m = moments(st);
    const EntropySplit e = relative_entropy(L.grid, st.f, m.rho, m.u, theta);
    mass_drift = std::max(mass_drift, std::abs(st.mass() - m0) / m0);
    t.add({st.time, st.mass(), m.energy, modulated_kinetic_energy(L.grid, st.f, m.u), e.total, e.kinetic,
           e.macro, fisher_information(st), mean_velocity(st), momentum_drift(st)});
  };
  const KineticState fin = integrate(std::move(s0), regime, k, k.every, observe);
  rep.tables.push_back(t);
  const Moments mf = moments(fin);
  Table mom{"moments_final", {"x", "rho", "u", "strength"}, {}};
  const GridField& field = fin.weight ? fin.weight->w : fin.strength;
  for (int i = 0; i < L.xg.size(); ++i)
    mom.add({L.xg.node(i)[0], mf.rho.values[i], mf.u.values[i], field.values[i]});
  rep.tables.push_back(mom);
  rep.checkpoints.push_back({"final", kinetic_checkpoint(fin)});
  rep.metric("boundary_mass_fraction", boundary_mass_fraction(fin));
  rep.check("kinetic mass conserved", mass_drift <= c.experiment.tol.conservation, mass_drift,
            c.experiment.tol.conservation);
  LinePlot plot{"Kinetic diagnostics", "t", "value", false, false, {}};
  for (const char* col : {"e_f_u", "H", "ubar"}) plot.series.push_back({col, t.column("t"), t.column(col), false});
  rep.plots.push_back({"diagnostics", plot});
  return rep;
}

}  // namespace alignlab
