#include <doctest.h>

#include <cmath>
#include <numbers>

#include "alignlab/error.hpp"
#include "alignlab/macro.hpp"

using namespace alignlab;

namespace {

constexpr double kPi = std::numbers::pi;
const TorusGeometry kT1(1, 1.0);

MacroModel model_on(int n, double lambda = 1.0) {
  return MacroModel(AveragingModel::cs_mt(CommunicationKernel::inverse_power(2.0, kT1)), GridSpec(kT1, n), lambda);
}

MacroState wave_state(const MacroModel& model, double amp, double s0, Pressure p = Pressure::Pressureless) {
  const GridSpec& g = model.grid();
  return make_macro_state(
      GridField::from_function(g, [](const Vec& x) { return 1.0 + 0.2 * std::cos(2 * kPi * x[0]); }),
      GridField::from_function(g, [=](const Vec& x) { return s0 * (1.0 + 0.1 * std::sin(2 * kPi * x[0])); }),
      GridField::from_function(g, [=](const Vec& x) { return amp * std::sin(2 * kPi * x[0]); }), p, model);
}

MacroState evolve(const MacroState& st, const MacroModel& model, double T, double dt) {
  MacroState cur = st;
  const int steps = static_cast<int>(std::lround(T / dt));
  for (int n = 0; n < steps; ++n) cur = macro_step(cur, model, dt);
  return cur;
}

}  // namespace

TEST_CASE("spectral derivative of a trigonometric polynomial") {
  const Spectral1D D(64, 1.0);
  std::vector<double> f(64), df(64);
  for (int i = 0; i < 64; ++i) {
    const double x = i / 64.0;
    f[i] = std::sin(2 * kPi * x) + 0.5 * std::cos(6 * kPi * x);
    df[i] = 2 * kPi * std::cos(2 * kPi * x) - 3 * kPi * std::sin(6 * kPi * x);
  }
  const auto d1 = D.derivative(f), d2 = D.raw_derivative(f);
  for (int i = 0; i < 64; ++i) {
    CHECK(d1[i] == doctest::Approx(df[i]).epsilon(1e-10).scale(1.0));
    CHECK(d2[i] == doctest::Approx(df[i]).epsilon(1e-10).scale(1.0));
  }
  CHECK(D.tail_fraction(f) < 1e-20);
}

TEST_CASE("uniform equilibria have zero tendencies") {
  const auto model = model_on(32);
  for (auto p : {Pressure::Pressureless, Pressure::Isentropic}) {
    const GridSpec& g = model.grid();
    const auto st = make_macro_state(GridField(g, 1.3), GridField(g, 0.7), GridField(g, -0.4), p, model);
    const auto t = macro_rhs(st, model);
    for (std::size_t i = 0; i < t.rho.size(); ++i) {
      CHECK(std::abs(t.rho[i]) < 1e-12);
      CHECK(std::abs(t.s[i]) < 1e-12);
      CHECK(std::abs(t.q[i]) < 1e-12);
    }
  }
}

TEST_CASE("e quantity of a sine wave") {
  const auto model = model_on(64);
  const GridSpec& g = model.grid();
  const auto st = make_macro_state(GridField(g, 1.0), GridField(g, 1.0),
                                   GridField::from_function(g, [](const Vec& x) { return std::sin(2 * kPi * x[0]); }),
                                   Pressure::Pressureless, model);
  const auto e = e_quantity(st, model);
  CHECK(e.min == doctest::Approx(1.0 - 2 * kPi).epsilon(1e-12));
  CHECK(e.max == doctest::Approx(1.0 + 2 * kPi).epsilon(1e-12));
  CHECK(e.integral == doctest::Approx(st.s.integral()).epsilon(1e-12));
}

TEST_CASE("density and strength masses are conserved") {
  for (auto p : {Pressure::Pressureless, Pressure::Isentropic}) {
    const auto model = model_on(128);
    const auto st = wave_state(model, 0.1, 1.0, p);
    const double dt = 0.5 * macro_admissible_dt(st, model);
    const auto out = evolve(st, model, 100 * dt, dt);
    CHECK(out.rho.integral() == doctest::Approx(st.rho.integral()).epsilon(1e-12));
    CHECK(out.s.integral() == doctest::Approx(st.s.integral()).epsilon(1e-12));
    CHECK(out.time == doctest::Approx(100 * dt));
  }
}

TEST_CASE("time integration is fourth order") {
  const auto model = model_on(64);
  const auto st = wave_state(model, 0.1, 1.0);
  const double T = 0.4;
  const auto ref = evolve(st, model, T, 0.0025);
  auto err = [&](double dt) {
    const auto out = evolve(st, model, T, dt);
    double e = 0.0;
    for (std::size_t i = 0; i < out.u.values.size(); ++i)
      e = std::max({e, std::abs(out.u.values[i] - ref.u.values[i]), std::abs(out.rho.values[i] - ref.rho.values[i])});
    return e;
  };
  const double e1 = err(0.04), e2 = err(0.02);
  INFO("errors " << e1 << " " << e2);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("subcritical data stay regular and supercritical data blow up") {
  const auto model = model_on(256);
  const auto sub = wave_state(model, 0.1, 1.0);
  CHECK(e_quantity(sub, model).min > 0.0);
  const auto r1 = threshold_probe(sub, model, 3.0, 0.01);
  CHECK(r1.regular);
  CHECK(r1.min_e > 0.0);
  CHECK(r1.max_e_integral_drift < 1e-10);
  CHECK(r1.last_state.time == doctest::Approx(3.0));

  const auto super = wave_state(model, 0.5, 0.5);
  CHECK(e_quantity(super, model).min < 0.0);
  const auto r2 = threshold_probe(super, model, 3.0, 0.01);
  CHECK_FALSE(r2.regular);
  CHECK(r2.blowup_time > 0.0);
  CHECK(r2.blowup_time < 3.0);
  CHECK_FALSE(r2.reason.empty());
}

TEST_CASE("vacuum, grid and step guards") {
  const auto model = model_on(16);
  const GridSpec& g = model.grid();
  GridField rho(g, 1.0);
  rho.values[3] = 0.0;
  CHECK_THROWS_AS(make_macro_state(rho, GridField(g, 1.0), GridField(g, 0.0), Pressure::Pressureless, model),
                  VacuumError);
  auto st = make_macro_state(GridField(g, 1.0), GridField(g, 1.0), GridField(g, 0.5), Pressure::Pressureless, model);
  st.rho.values[5] = 1e-12;
  CHECK_THROWS_AS(macro_rhs(st, model), VacuumError);

  CHECK_THROWS_AS(make_macro_state(GridField(GridSpec(kT1, 8), 1.0), GridField(g, 1.0), GridField(g, 0.0),
                                   Pressure::Pressureless, model),
                  InvalidGrid);
  CHECK_THROWS_AS(MacroModel(AveragingModel::cs_mt(CommunicationKernel::constant(1.0)),
                             GridSpec(TorusGeometry(2, 1.0), 8, 8)),
                  InvalidGrid);

  const auto ok = make_macro_state(GridField(g, 1.0), GridField(g, 1.0), GridField(g, 0.5), Pressure::Pressureless, model);
  const double limit = macro_admissible_dt(ok, model);
  CHECK(limit == doctest::Approx(std::min(0.5 * (1.0 / 16) / 0.5, 1.0)));
  CHECK_THROWS_AS(macro_step(ok, model, 2.0 * limit), StepRejected);
}
