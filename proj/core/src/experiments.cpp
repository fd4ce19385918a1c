#include "alignlab/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "alignlab/fitting.hpp"
#include "alignlab/macro.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/micro.hpp"
#include "alignlab/parallel.hpp"
#include "exp_common.hpp"

namespace alignlab {

using namespace detail;

// ---- report ---------------------------------------------------------------------------------

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Info: return "info";
  }
  return "info";
}

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size())
    throw InvalidArgument("table '" + name + "' row has the wrong width");
  rows.push_back(std::move(row));
}

std::vector<double> Table::column(const std::string& col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw InvalidArgument("table '" + name + "' has no column " + col);
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

void ExperimentReport::metric(const std::string& name, double value) {
  metrics.emplace_back(name, value);
}

double ExperimentReport::metric_value(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw InvalidArgument("report has no metric " + name);
}

Check& ExperimentReport::check(const std::string& name, bool ok, double value, double threshold,
                               const std::string& detail) {
  checks.push_back({name, ok ? Verdict::Pass : Verdict::Fail, value, threshold, detail});
  return checks.back();
}

Check& ExperimentReport::fit_check(const std::string& name, bool ok, double residual,
                                   double residual_limit, double value, double threshold,
                                   const std::string& detail) {
  Check& c = check(name, ok, value, threshold, detail);
  if (!(residual <= residual_limit)) {
    c.verdict = Verdict::Inconclusive;
    c.detail += (c.detail.empty() ? "" : "; ") + std::string("fit residual ") +
                format_double(residual) + " above " + format_double(residual_limit);
  }
  return c;
}

void ExperimentReport::info(const std::string& name, double value, const std::string& detail) {
  checks.push_back({name, Verdict::Info, value, 0.0, detail});
}

const Check& ExperimentReport::find_check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InvalidArgument("report has no check " + name);
}

bool ExperimentReport::passed() const {
  for (const auto& c : checks)
    if (c.verdict == Verdict::Fail || c.verdict == Verdict::Inconclusive) return false;
  return true;
}

std::vector<std::filesystem::path> emit_outputs(const ExperimentReport& report,
                                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  for (const auto& t : report.tables) {
    const auto path = dir / (t.name + ".csv");
    CsvWriter w(path, t.columns);
    for (const auto& r : t.rows) {
      std::vector<CsvCell> cells(r.begin(), r.end());
      w.row(cells);
    }
    written.push_back(path);
  }

  {
    const auto path = dir / "summary.csv";
    CsvWriter w(path, {"kind", "name", "value", "threshold", "verdict", "detail"});
    for (const auto& [k, v] : report.metrics) w.row({std::string("metric"), k, v, 0.0, std::string(), std::string()});
    for (const auto& c : report.checks)
      w.row({std::string("check"), c.name, c.value, c.threshold, to_string(c.verdict), c.detail});
    written.push_back(path);
  }

  {
    nlohmann::ordered_json j;
    j["experiment"] = report.experiment;
    j["seed"] = report.seed;
    j["passed"] = report.passed();
    auto& m = j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.metrics) m[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(format_double(v));
    auto& cs = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks)
      cs.push_back({{"name", c.name},
                    {"verdict", to_string(c.verdict)},
                    {"value", std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(format_double(c.value))},
                    {"threshold", c.threshold},
                    {"detail", c.detail}});
    auto& files = j["files"] = nlohmann::ordered_json::array();
    for (const auto& t : report.tables) files.push_back(t.name + ".csv");
    for (const auto& p : report.plots) files.push_back(p.name + ".svg");
    for (const auto& c : report.checkpoints) files.push_back(c.name + ".bin");
    const auto path = dir / "summary.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed on " + path.string());
    written.push_back(path);
  }

  for (const auto& p : report.plots) {
    const auto path = dir / (p.name + ".svg");
    write_svg(path, p.plot);
    written.push_back(path);
  }
  for (const auto& c : report.checkpoints) {
    const auto path = dir / (c.name + ".bin");
    write_checkpoint(path, c.data);
    written.push_back(path);
  }
  return written;
}

// ---- heterogeneous flocks -------------------------------------------------------------------

namespace {

struct FlockStats {
  double mean_speed = 0.0;
  double spread = 0.0;  // rms deviation from the flock's mean velocity
  Vec mean{0.0, 0.0};
};

FlockStats flock_stats(const ParticleEnsemble& ens, std::size_t begin, std::size_t end) {
  FlockStats s;
  if (begin >= end) return s;
  double mass = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mass += ens.m[i];
    s.mean += ens.m[i] * ens.v[i];
    s.mean_speed += ens.m[i] * norm(ens.v[i]);
  }
  s.mean = (1.0 / mass) * s.mean;
  s.mean_speed /= mass;
  for (std::size_t i = begin; i < end; ++i) {
    const Vec d = ens.v[i] - s.mean;
    s.spread += ens.m[i] * dot(d, d);
  }
  s.spread = std::sqrt(s.spread / mass);
  return s;
}

ParticleEnsemble two_flocks(const RunConfig& c, std::size_t& small_count) {
  const auto& m = c.micro;
  const TorusGeometry geom(2, 1.0);
  std::mt19937_64 rng(c.experiment.seed);
  std::vector<Vec> x, v;
  std::vector<double> mass;
  const int ns = m.single_flock ? m.small_count + m.large_count : m.small_count;
  const int nl = m.single_flock ? 0 : m.large_count;
  auto add = [&](int count, Vec centre, Vec vel, double mi) {
    for (int i = 0; i < count; ++i) {
      x.push_back({centre[0] + 0.03 * gaussian(rng), centre[1] + 0.03 * gaussian(rng)});
      v.push_back({vel[0] + m.velocity_spread * gaussian(rng), vel[1] + m.velocity_spread * gaussian(rng)});
      mass.push_back(mi);
    }
  };
  add(ns, {0.25, 0.25}, {0.2, 0.0}, 1.0);
  add(nl, {0.75, 0.75}, {0.0, 0.0}, m.mass_ratio);
  double total = 0.0;
  for (double mi : mass) total += mi;
  for (double& mi : mass) mi /= total;
  small_count = static_cast<std::size_t>(ns);
  return ParticleEnsemble(geom, std::move(x), std::move(v), std::move(mass));
}

Table flock_series_table(const std::string& name) {
  return Table{name,
               {"t", "small_mean_speed", "small_spread", "small_mean_vx", "small_mean_vy",
                "large_mean_vx", "large_mean_vy", "max_speed"},
               {}};
}

}  // namespace

ExperimentReport exp_heterogeneous(const RunConfig& c) {
  if (c.micro.dim != 2) throw PreconditionError("heterogeneous flock study needs micro.dim = 2");
  ExperimentReport rep;
  rep.experiment = "hetero";
  rep.seed = c.experiment.seed;
  std::size_t ns = 0;
  const ParticleEnsemble ens0 = two_flocks(c, ns);
  const std::size_t n = ens0.size();
  const CommunicationKernel k = make_kernel(c.kernel, ens0.geom);
  const GridSpec grid(ens0.geom, c.micro.grid, c.micro.grid);

  // w0 = 1 / (rho0)_phi on the grid
  const auto rp = convolve_density(k, ens0.density(), grid.nodes());
  std::vector<double> w0(rp.size());
  for (std::size_t i = 0; i < rp.size(); ++i) {
    if (!(rp[i] > kDivisionHazard)) throw DivisionHazard("(rho0)_phi vanishes on the grid");
    w0[i] = 1.0 / rp[i];
  }
  const std::vector<MicroModel> models{
      MicroModel::cucker_smale(c.micro.lambda, k),
      MicroModel::w_model(c.micro.lambda, k, WeightField(GridField(grid, w0)))};
  const std::vector<std::string> names{"cs", "w"};

  std::vector<Table> series(2);
  std::vector<MicroRun> runs(2);
  const std::vector<int> idx{0, 1};
  const auto results = parallel_map(idx, [&](int m) {
    Table t = flock_series_table(names[m] + "_series");
    auto observe = [&](const MicroModel&, const ParticleEnsemble& e) {
      const FlockStats s = flock_stats(e, 0, ns), l = flock_stats(e, ns, n);
      double vmax = 0.0;
      for (const auto& vi : e.v) vmax = std::max(vmax, norm(vi));
      t.add({e.time, s.mean_speed, s.spread, s.mean[0], s.mean[1], l.mean[0], l.mean[1], vmax});
    };
    MicroRun r = run(models[m], ens0, c.micro.t_end, c.micro.dt, c.micro.every, observe);
    return std::make_pair(std::move(t), std::move(r));
  });
  for (int m = 0; m < 2; ++m) {
    series[m] = results[m].first;
    runs[m] = results[m].second;
    if (runs[m].aborted) throw Error(names[m] + " run aborted: " + runs[m].error);
  }

  const FlockStats cs0 = flock_stats(ens0, 0, ns);
  const FlockStats csT = flock_stats(runs[0].final_ensemble, 0, ns);
  const FlockStats wT = flock_stats(runs[1].final_ensemble, 0, ns);
  const FlockStats wlT = flock_stats(runs[1].final_ensemble, ns, n);
  const double speed_change = std::abs(csT.mean_speed - cs0.mean_speed) / cs0.mean_speed;
  const double decay_cs = 1.0 - csT.spread / cs0.spread;
  const double decay_w = 1.0 - wT.spread / cs0.spread;
  const double separation = ns < n ? norm(wT.mean - wlT.mean) : 0.0;
  rep.metric("cs_small_mean_speed_change", speed_change);
  rep.metric("cs_small_spread_decay", decay_cs);
  rep.metric("w_small_spread_decay", decay_w);
  rep.metric("w_small_large_mean_velocity_gap", separation);
  rep.metric("w_small_final_spread", wT.spread);

  const auto& tol = c.experiment.tol;
  if (c.micro.single_flock) {
    rep.check("single flock aligns under cs", decay_cs >= tol.spread_decay, decay_cs, tol.spread_decay);
    rep.check("single flock aligns under w", decay_w >= tol.spread_decay, decay_w, tol.spread_decay);
  } else {
    rep.check("cs small flock mean speed change below tolerance", speed_change < tol.speed_change,
              speed_change, tol.speed_change);
    rep.check("w small flock spread decays", decay_w >= tol.spread_decay, decay_w, tol.spread_decay);
    rep.check("w small flock keeps its own mean velocity",
              separation > tol.separation_factor * wT.spread, separation,
              tol.separation_factor * wT.spread, "gap to the large flock vs factor x final spread");
  }

  LinePlot spread{"Small-flock velocity spread", "t", "rms spread", false, true, {}};
  LinePlot speed{"Small-flock mean speed", "t", "mean speed", false, false, {}};
  for (int m = 0; m < 2; ++m) {
    spread.series.push_back({names[m], series[m].column("t"), series[m].column("small_spread")});
    speed.series.push_back({names[m], series[m].column("t"), series[m].column("small_mean_speed")});
    rep.tables.push_back(series[m]);
    rep.checkpoints.push_back({names[m] + "_final", particle_checkpoint(runs[m].final_ensemble, runs[m].final_model)});
  }
  rep.plots.push_back({"small_flock_spread", spread});
  rep.plots.push_back({"small_flock_speed", speed});
  return rep;
}

// ---- mean-field study -----------------------------------------------------------------------

namespace {

/// Inverse CDF of the density 1 + a cos(2 pi x) on [0, 1) by Newton iteration with bisection.
double cosine_quantile(double q, double a) {
  double lo = 0.0, hi = 1.0, x = q;
  for (int k = 0; k < 100; ++k) {
    const double F = x + a * std::sin(kTwoPi * x) / kTwoPi - q;
    if (std::abs(F) < 1e-15) break;
    if (F > 0) hi = x;
    else lo = x;
    const double dF = 1.0 + a * std::cos(kTwoPi * x);
    double nx = x - F / dF;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    x = nx;
  }
  return x;
}

}  // namespace

/// Stratified sample of mu0: x by inverse CDF of 1 + a cos at stratified quantiles (2D: product
/// density, second axis on the golden-ratio lattice), v = u0(x) + spread * normal quantile of a
/// Kronecker sequence. Cranley-Patterson shifts come from the seed.
ParticleEnsemble sample_initial(const RunConfig& c, int N) {
  const auto& m = c.micro;
  std::mt19937_64 rng(c.experiment.seed);
  const double sx = uniform01(rng), sy = uniform01(rng), sv0 = uniform01(rng), sv1 = uniform01(rng);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const double plastic = 0.7548776662466927;  // 1 / plastic number
  const TorusGeometry geom(m.dim, 1.0);
  std::vector<Vec> x(N), v(N);
  std::vector<double> mass(N, 1.0 / N);
  for (int i = 0; i < N; ++i) {
    const double qx = frac((i + 0.5) / N + sx / N);
    x[i][0] = cosine_quantile(qx, m.rho_amplitude);
    if (m.dim == 2) x[i][1] = cosine_quantile(frac(i * golden + sy), m.rho_amplitude);
    const double p0 = std::clamp(frac((i + 0.5) * golden + sv0), 1e-12, 1.0 - 1e-12);
    v[i][0] = m.u_amplitude * std::sin(kTwoPi * x[i][0]) + m.velocity_spread * normal_quantile(p0);
    if (m.dim == 2) {
      const double p1 = std::clamp(frac((i + 0.5) * plastic + sv1), 1e-12, 1.0 - 1e-12);
      v[i][1] = m.u_amplitude * std::sin(kTwoPi * x[i][1]) + m.velocity_spread * normal_quantile(p1);
    }
  }
  return ParticleEnsemble(geom, std::move(x), std::move(v), std::move(mass));
}

MicroModel micro_model_from_config(const RunConfig& c, const TorusGeometry& geom,
                                   const ParticleEnsemble& ens) {
  const auto& m = c.micro;
  const CommunicationKernel k = make_kernel(c.kernel, geom);
  const GridSpec grid = m.dim == 2 ? GridSpec(geom, m.grid, m.grid) : GridSpec(geom, m.grid);
  if (m.model == "cs") return MicroModel::cucker_smale(m.lambda, k);
  if (m.model == "mt") return MicroModel::motsch_tadmor(m.lambda, k);
  if (m.model == "s") {
    const AveragingModel avg = make_averaging(c.averaging, k);
    GridField s(grid, convolve_density(k, ens.density(), grid.nodes()));
    return MicroModel::s_model(m.lambda, avg, std::move(s));
  }
  const GridField w = GridField::from_function(grid, [&](const Vec& p) {
    double r = 1.0 + m.w_amplitude * std::sin(kTwoPi * p[0]);
    if (m.dim == 2) r *= 1.0 + m.w_amplitude * std::cos(kTwoPi * p[1]);
    return r;
  });
  return MicroModel::w_model(m.lambda, k, WeightField(w));
}

namespace {

/// Strength field of a model on its grid (CS: rho_phi, MT: 1).
GridField strength_on_grid(const MicroModel& model, const ParticleEnsemble& ens, const GridSpec& grid) {
  switch (model.variant) {
    case MicroVariant::SModel:
      return *model.strength;
    case MicroVariant::WModel:
      return weight_to_strength(model.weight->w, ens.density(), model.kernel);
    case MicroVariant::CuckerSmale:
      return GridField(grid, convolve_density(model.kernel, ens.density(), grid.nodes()));
    case MicroVariant::MotschTadmor:
      break;
  }
  return GridField(grid, 1.0);
}

double phase_w1(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  const auto& g = a.geom;
  return w_p_empirical(a.m, b.m, [&](int i, int j) {
    const Vec dx = periodic_displacement(a.x[i], b.x[j], g);
    const Vec dv = a.v[i] - b.v[j];
    return std::sqrt(dot(dx, dx) + dot(dv, dv));
  }, 1);
}

}  // namespace

ExperimentReport exp_mean_field(const RunConfig& c) {
  const auto& m = c.micro;
  ExperimentReport rep;
  rep.experiment = "meanfield";
  rep.seed = c.experiment.seed;
  std::vector<int> sizes;
  for (int n : m.n_sweep) {
    sizes.push_back(n);
    sizes.push_back(2 * n);
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  const TorusGeometry geom(m.dim, 1.0);
  const GridSpec grid = m.dim == 2 ? GridSpec(geom, m.grid, m.grid) : GridSpec(geom, m.grid);
  struct Outcome {
    ParticleEnsemble ens;
    GridField s;
  };
  const auto outcomes = parallel_map(sizes, [&](int N) {
    const ParticleEnsemble e0 = sample_initial(c, N);
    const MicroModel model = micro_model_from_config(c, geom, e0);
    MicroRun r = run(model, e0, m.t_end, m.dt, 1000000);
    if (r.aborted) throw Error("mean-field run with N = " + std::to_string(N) + " aborted: " + r.error);
    GridField s = strength_on_grid(r.final_model, r.final_ensemble, grid);
    return Outcome{std::move(r.final_ensemble), std::move(s)};
  });
  auto at = [&](int N) -> const Outcome& {
    return outcomes[std::find(sizes.begin(), sizes.end(), N) - sizes.begin()];
  };

  Table t{"cauchy", {"N", "w1_cauchy", "strength_cauchy"}, {}};
  std::vector<double> ns, w1, sd;
  for (int N : m.n_sweep) {
    const Outcome& a = at(N);
    const Outcome& b = at(2 * N);
    const double d = phase_w1(a.ens, b.ens);
    double sup = 0.0;
    for (std::size_t i = 0; i < a.s.values.size(); ++i)
      sup = std::max(sup, std::abs(a.s.values[i] - b.s.values[i]));
    t.add({static_cast<double>(N), d, sup});
    ns.push_back(N);
    w1.push_back(d);
    sd.push_back(sup);
  }
  rep.tables.push_back(t);
  const PowerFit fw = power_fit(ns, w1);
  rep.metric("w1_decay_exponent", -fw.exponent);
  rep.metric("w1_fit_residual", fw.line.relative_residual);
  rep.check("W1 Cauchy differences strictly decreasing in N", strictly_decreasing(w1), w1.back(), w1.front());
  bool positive = std::all_of(sd.begin(), sd.end(), [](double v) { return v > 0.0; });
  if (positive) {
    const PowerFit fs = power_fit(ns, sd);
    rep.metric("strength_decay_exponent", -fs.exponent);
    rep.metric("strength_fit_residual", fs.line.relative_residual);
  }
  rep.check("strength sup differences decreasing in N", strictly_decreasing(sd), sd.back(), sd.front());

  LinePlot p{"Cauchy differences", "N", "difference", true, true, {}};
  p.series.push_back({"W1(mu_N, mu_2N)", ns, w1});
  p.series.push_back({"sup |s_N - s_2N|", ns, sd});
  rep.plots.push_back({"cauchy_differences", p});
  return rep;
}

// ---- threshold study ------------------------------------------------------------------------

namespace {

MacroModel macro_model_from_config(const RunConfig& c) {
  const TorusGeometry geom(1, 1.0);
  const GridSpec grid(geom, c.macro.n);
  const CommunicationKernel k = make_kernel(c.kernel, geom);
  return MacroModel(make_averaging(c.averaging, k), grid, c.macro.lambda);
}

Table threshold_table(const std::string& name, const ThresholdResult& r) {
  Table t{name, {"t", "min_e", "max_gradient", "e_integral", "rho_mass", "s_mass", "u_oscillation"}, {}};
  for (const auto& s : r.series)
    t.add({s.t, s.min_e, s.max_gradient, s.e_integral, s.rho_mass, s.s_mass, s.u_oscillation});
  return t;
}

}  // namespace

ExperimentReport exp_threshold(const RunConfig& c) {
  ExperimentReport rep;
  rep.experiment = "threshold";
  rep.seed = c.experiment.seed;
  const MacroModel model = macro_model_from_config(c);
  const GridSpec& g = model.grid();
  const Pressure pressure = c.macro.pressure == "isentropic" ? Pressure::Isentropic : Pressure::Pressureless;
  const GridField rho = cosine_profile(g, c.macro.rho_amplitude);
  const GridField s(g, 1.0);
  const MacroState sub = make_macro_state(rho, s, sine_profile(g, c.macro.sub_amplitude), pressure, model);
  const MacroState sup = make_macro_state(rho, s, sine_profile(g, -c.macro.super_amplitude), pressure, model);
  const double e_sub = e_quantity(sub, model).min, e_sup = e_quantity(sup, model).min;
  if (pressure == Pressure::Pressureless) {
    if (!(e_sub >= 0.0)) throw PreconditionError("subcritical data needs min e0 >= 0");
    if (!(e_sup < 0.0)) throw PreconditionError("supercritical data needs min e0 < 0");
  }
  rep.metric("sub_min_e0", e_sub);
  rep.metric("super_min_e0", e_sup);

  const std::vector<const MacroState*> inits{&sub, &sup};
  const auto results = parallel_map(inits, [&](const MacroState* s0) {
    return threshold_probe(*s0, model, c.macro.t_end, c.macro.dt, c.macro.every);
  });
  const ThresholdResult& rs = results[0];
  const ThresholdResult& rb = results[1];
  const double tol = c.experiment.tol.conservation;
  rep.metric("sub_e_integral_drift", rs.max_e_integral_drift);
  rep.metric("super_e_integral_drift", rb.max_e_integral_drift);
  rep.metric("super_blowup_time", rb.regular ? std::numeric_limits<double>::quiet_NaN() : rb.blowup_time);
  rep.check("subcritical data classified regular", rs.regular, rs.regular ? c.macro.t_end : rs.blowup_time,
            c.macro.t_end, rs.reason);
  rep.check("supercritical data triggers blow-up detection", !rb.regular, rb.blowup_time, c.macro.t_end, rb.reason);
  rep.check("e integral conserved (subcritical)", rs.max_e_integral_drift <= tol, rs.max_e_integral_drift, tol);
  rep.check("e integral conserved until detection (supercritical)", rb.max_e_integral_drift <= tol,
            rb.max_e_integral_drift, tol);

  rep.tables.push_back(threshold_table("subcritical_series", rs));
  rep.tables.push_back(threshold_table("supercritical_series", rb));
  LinePlot p{"Minimum of e", "t", "min e", false, false, {}};
  p.series.push_back({"subcritical", rep.tables[0].column("t"), rep.tables[0].column("min_e")});
  p.series.push_back({"supercritical", rep.tables[1].column("t"), rep.tables[1].column("min_e")});
  rep.plots.push_back({"min_e", p});
  rep.checkpoints.push_back({"subcritical_final", macro_checkpoint(rs.last_state)});
  rep.checkpoints.push_back({"supercritical_final", macro_checkpoint(rb.last_state)});
  return rep;
}

// ---- single runs ----------------------------------------------------------------------------

ExperimentReport simulate_micro(const RunConfig& c) {
  ExperimentReport rep;
  rep.experiment = "simulate-micro";
  rep.seed = c.experiment.seed;
  const TorusGeometry geom(c.micro.dim, 1.0);
  const ParticleEnsemble e0 = sample_initial(c, c.micro.n);
  const MicroModel model = micro_model_from_config(c, geom, e0);
  const MicroRun r = run(model, e0, c.micro.t_end, c.micro.dt, c.micro.every);
  Table t{"diagnostics",
          {"t", "velocity_diameter", "flock_diameter", "max_speed", "momentum_x", "momentum_y",
           "j_running", "field_mass"},
          {}};
  for (const auto& d : r.series)
    t.add({d.t, d.velocity_diameter, d.flock_diameter, d.max_speed, d.total_momentum[0],
           d.total_momentum[1], d.j_running, d.field_mass});
  rep.tables.push_back(t);
  Table fin{"particles_final", {"t", "i", "x", "y", "vx", "vy", "m"}, {}};
  for (std::size_t i = 0; i < r.final_ensemble.size(); ++i) {
    const auto& e = r.final_ensemble;
    fin.add({e.time, static_cast<double>(i), e.x[i][0], e.x[i][1], e.v[i][0], e.v[i][1], e.m[i]});
  }
  rep.tables.push_back(fin);
  rep.checkpoints.push_back({"final", particle_checkpoint(r.final_ensemble, r.final_model)});
  rep.check("run completed", !r.aborted, r.final_ensemble.time, c.micro.t_end, r.error);
  const auto speeds = t.column("max_speed");
  rep.check("max speed non-increasing", non_increasing(speeds, 1e-6 * c.micro.t_end), speeds.back(), speeds.front());
  LinePlot p{"Velocity diameter", "t", "diameter", false, true, {}};
  p.series.push_back({"velocity", t.column("t"), t.column("velocity_diameter")});
  p.series.push_back({"position", t.column("t"), t.column("flock_diameter")});
  rep.plots.push_back({"diameters", p});
  return rep;
}

ExperimentReport simulate_macro(const RunConfig& c) {
  ExperimentReport rep;
  rep.experiment = "simulate-macro";
  rep.seed = c.experiment.seed;
  const MacroModel model = macro_model_from_config(c);
  const GridSpec& g = model.grid();
  const Pressure pressure = c.macro.pressure == "isentropic" ? Pressure::Isentropic : Pressure::Pressureless;
  const MacroState s0 = make_macro_state(cosine_profile(g, c.macro.rho_amplitude), GridField(g, 1.0),
                                         sine_profile(g, c.macro.u_amplitude), pressure, model);
  const ThresholdResult r = threshold_probe(s0, model, c.macro.t_end, c.macro.dt, c.macro.every);
  rep.tables.push_back(threshold_table("diagnostics", r));
  const EQuantity e = e_quantity(r.last_state, model);
  Table st{"state_final", {"x", "rho", "s", "u", "e"}, {}};
  for (int i = 0; i < g.size(); ++i)
    st.add({g.node(i)[0], r.last_state.rho.values[i], r.last_state.s.values[i], r.last_state.u.values[i],
            e.e.values[i]});
  rep.tables.push_back(st);
  rep.checkpoints.push_back({"final", macro_checkpoint(r.last_state)});
  rep.metric("final_time", r.last_state.time);
  rep.check("run stayed regular", r.regular, r.regular ? c.macro.t_end : r.blowup_time, c.macro.t_end, r.reason);
  rep.check("e integral conserved", r.max_e_integral_drift <= c.experiment.tol.conservation,
            r.max_e_integral_drift, c.experiment.tol.conservation);
  LinePlot p{"Final state", "x", "value", false, false, {}};
  for (const char* col : {"rho", "s", "u", "e"}) p.series.push_back({col, st.column("x"), st.column(col), false});
  rep.plots.push_back({"state_final", p});
  return rep;
}

ExperimentReport spectral_gap_study(const RunConfig& c) {
  ExperimentReport rep;
  rep.experiment = "spectral-gap";
  rep.seed = c.experiment.seed;
  const TorusGeometry geom(1, 1.0);
  const GridSpec g(geom, c.kinetic.nx);
  const CommunicationKernel k = make_kernel(c.kernel, geom);
  const GridField rho = cosine_profile(g, c.kinetic.rho_amplitude);
  const GridField w = GridField::from_function(g, [&](const Vec& x) {
    return 1.0 + c.kinetic.w_variation * std::sin(kTwoPi * x[0]);
  });
  const SpectralGapResult r = spectral_gap_estimate(k, rho, w);
  const SpectralGapResult rc = spectral_gap_estimate(k, rho, GridField(g, 1.0));
  rep.metric("epsilon0", r.epsilon0);
  rep.metric("lambda_max", r.lambda_max);
  rep.metric("iterations", r.iterations);
  rep.metric("residual", r.residual);
  rep.metric("epsilon0_constant_w", rc.epsilon0);
  rep.check("spectral gap positive", r.epsilon0 > 0.0, r.epsilon0, 0.0);
  // Constant w: epsilon0 >= c0 M / max rho_phi.
  if (k.c0() > 0.0) {
    const auto rp = GridConvolver(k, g).apply(rho.values);
    const double bound = k.c0() * rho.integral() / *std::max_element(rp.begin(), rp.end());
    rep.metric("constant_w_lower_bound", bound);
    rep.check("constant-w gap above kernel lower bound", rc.epsilon0 >= bound * (1.0 - 1e-8), rc.epsilon0, bound);
  }
  return rep;
}

ExperimentReport run_experiment(const RunConfig& c) {
  validate(c);
  const std::string& n = c.experiment.name;
  if (n == "hetero") return exp_heterogeneous(c);
  if (n == "meanfield") return exp_mean_field(c);
  if (n == "monokinetic") return exp_monokinetic(c);
  if (n == "maxwellian") return exp_maxwellian(c);
  if (n == "relaxation") return exp_relaxation(c);
  if (n == "threshold") return exp_threshold(c);
  if (n == "simulate-micro") return simulate_micro(c);
  if (n == "simulate-kinetic") return simulate_kinetic(c);
  if (n == "simulate-macro") return simulate_macro(c);
  if (n == "spectral-gap") return spectral_gap_study(c);
  throw ConfigError("unknown experiment '" + n + "'");
}

}  // namespace alignlab
