#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "alignlab/error.hpp"
#include "alignlab/fitting.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/network_simplex.hpp"

using namespace alignlab;

namespace {

constexpr double kPi = std::numbers::pi;

double circle_dist(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

double empirical_circle(const Measure1D& mu, const Measure1D& nu, int p) {
  return w_p_empirical(mu.masses, nu.masses,
                       [&](int i, int j) { return circle_dist(mu.points[i], nu.points[j]); }, p);
}

Measure1D random_measure(std::mt19937_64& rng, int n, bool uniform_mass) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n), m(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = u(rng);
    m[i] = uniform_mass ? 1.0 : 0.2 + u(rng);
    total += m[i];
  }
  for (double& mi : m) mi /= total;
  return Measure1D::atoms(1.0, x, m);
}

}  // namespace

TEST_CASE("Dirac masses on the circle") {
  const auto d0 = Measure1D::atoms(1.0, {0.0}, {1.0});
  const auto d3 = Measure1D::atoms(1.0, {0.3}, {1.0});
  const auto d6 = Measure1D::atoms(1.0, {0.6}, {1.0});
  CHECK(w1_circle(d0, d3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(w1_circle(d0, d6) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(w2_circle(d0, d3) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(w2_circle(d0, d6) == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(empirical_circle(d0, d6, 2) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(w1_circle(d3, d3) == 0.0);
}

TEST_CASE("two-atom measures match the brute-force coupling") {
  // couplings of two two-atom measures form a segment parameterized by g_11; the cost is linear
  // in g_11, so the optimum sits at an endpoint
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_measure(rng, 2, false), nu = random_measure(rng, 2, false);
    const double a1 = mu.masses[0], a2 = mu.masses[1], b1 = nu.masses[0], b2 = nu.masses[1];
    auto cost = [&](double g11) {
      const double g12 = a1 - g11, g21 = b1 - g11, g22 = a2 - g21;
      auto c = [&](int i, int j) { return std::pow(circle_dist(mu.points[i], nu.points[j]), 2); };
      return g11 * c(0, 0) + g12 * c(0, 1) + g21 * c(1, 0) + g22 * c(1, 1);
    };
    const double lo = std::max(0.0, a1 - b2), hi = std::min(a1, b1);
    const double w2 = std::sqrt(std::min(cost(lo), cost(hi)));
    CHECK(empirical_circle(mu, nu, 2) == doctest::Approx(w2).epsilon(1e-9));
    CHECK(w2_circle(mu, nu) == doctest::Approx(w2).epsilon(1e-8));
  }
}

TEST_CASE("three uniform atoms match the best permutation") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mu = random_measure(rng, 3, true), nu = random_measure(rng, 3, true);
    std::vector<int> perm{0, 1, 2};
    double best = INFINITY;
    do {
      double c = 0.0;
      for (int i = 0; i < 3; ++i) c += std::pow(circle_dist(mu.points[i], nu.points[perm[i]]), 2) / 3.0;
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(std::abs(empirical_circle(mu, nu, 2) - std::sqrt(best)) < 1e-10);
    CHECK(std::abs(w2_circle(mu, nu) - std::sqrt(best)) < 1e-9);
  }
}

TEST_CASE("circle W1 agrees with the linear program") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_measure(rng, 7, false), nu = random_measure(rng, 5, false);
    CHECK(w1_circle(mu, nu) == doctest::Approx(empirical_circle(mu, nu, 1)).epsilon(1e-9));
    CHECK(w1_circle(mu, nu) <= w2_circle(mu, nu) + 1e-12);
  }
}

TEST_CASE("metric axioms on the torus") {
  const TorusGeometry g(2, 1.0);
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto cloud = [&] {
    std::vector<Vec> x(5);
    for (auto& p : x) p = {u(rng), u(rng)};
    return x;
  };
  const std::vector<double> m(5, 0.2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = cloud(), y = cloud(), z = cloud();
    const double xy = w_p_empirical(g, x, m, y, m, 2), yx = w_p_empirical(g, y, m, x, m, 2);
    const double yz = w_p_empirical(g, y, m, z, m, 2), xz = w_p_empirical(g, x, m, z, m, 2);
    CHECK(w_p_empirical(g, x, m, x, m, 2) < 1e-9);
    CHECK(std::abs(xy - yx) < 1e-9);
    CHECK(xz <= xy + yz + 1e-9);
    CHECK(w_p_empirical(g, x, m, y, m, 1) <= xy + 1e-9);
  }
}

TEST_CASE("mass scaling and input guards") {
  const auto mu = Measure1D::atoms(1.0, {0.1, 0.4}, {0.5, 0.5});
  const auto nu = Measure1D::atoms(1.0, {0.2, 0.8}, {0.3, 0.7});
  auto scaled = [](Measure1D m, double c) {
    for (double& x : m.masses) x *= c;
    return m;
  };
  const double base = empirical_circle(mu, nu, 2);
  CHECK(empirical_circle(scaled(mu, 4.0), scaled(nu, 4.0), 2) == doctest::Approx(2.0 * base).epsilon(1e-10));

  CHECK_THROWS_AS(w_p_empirical({1.0}, {0.5}, [](int, int) { return 0.0; }, 2), MassMismatch);
  const std::vector<double> big(kEmpiricalAtomLimit + 1, 1.0);
  CHECK_THROWS_AS(w_p_empirical(big, big, [](int, int) { return 0.0; }, 2), SizeLimit);
}

TEST_CASE("transport plan respects the marginals") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> a(12), b(9);
  for (double& x : a) x = u(rng);
  for (double& x : b) x = u(rng);
  const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
  for (double& x : b) x *= sa / sb;
  const auto plan = solve_transport(a, b, [](int i, int j) { return std::abs(i - 1.5 * j); });
  std::vector<double> ra(a.size(), 0.0), rb(b.size(), 0.0);
  double cost = 0.0;
  for (const auto& e : plan.flows) {
    CHECK(e.mass > 0.0);
    ra[e.i] += e.mass;
    rb[e.j] += e.mass;
    cost += e.mass * std::abs(e.i - 1.5 * e.j);
  }
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(ra[i] == doctest::Approx(a[i]).epsilon(1e-10));
  for (std::size_t j = 0; j < b.size(); ++j) CHECK(rb[j] == doctest::Approx(b[j]).epsilon(1e-10));
  CHECK(plan.cost == doctest::Approx(cost).epsilon(1e-10));
}

TEST_CASE("grid densities become node atoms") {
  const GridSpec g(TorusGeometry(1, 1.0), 10);
  const auto m = Measure1D::from_grid(GridField(g, 2.0));
  CHECK(m.points.size() == 10u);
  CHECK(m.total_mass() == doctest::Approx(2.0));
  CHECK(w1_circle(m, m) == 0.0);
}

TEST_CASE("monokinetic deviation of the ansatz is at the grid floor") {
  const KineticGrid g(1.0, 32, 64, 3.0);
  const GridSpec xg = g.x_grid();
  const GridField rho = GridField::from_function(xg, [](const Vec& x) { return 1.0 + 0.4 * std::sin(2 * kPi * x[0]); });
  const GridField u = GridField::from_function(xg, [](const Vec& x) { return std::cos(2 * kPi * x[0]); });
  const auto d = monokinetic_deviation(g, monokinetic_ansatz(g, rho, u), rho, u);
  // two-cell deposit with exact mean: (v_k+1 - u)(u - v_k) <= dv^2 / 4 per unit mass
  CHECK(d.modulated_energy <= g.dv() * g.dv() / 4.0 + 1e-14);
  CHECK(d.w2_spatial < 1e-6);  // golden-section shift search resolution
  CHECK(d.combined == doctest::Approx(std::sqrt(d.modulated_energy + d.w2_spatial * d.w2_spatial)));
}

TEST_CASE("L1 distance of disjoint bumps is the total mass") {
  const KineticGrid g(1.0, 16, 16, 2.0);
  std::vector<double> f(g.size(), 0.0), h(g.size(), 0.0);
  const double cell = g.hx() * g.dv();
  f[g.index(2, 3)] = 1.0 / cell;
  h[g.index(9, 12)] = 1.0 / cell;
  CHECK(l1_distance(g, f, h) == doctest::Approx(2.0));
  CHECK(l1_distance(g, f, f) == 0.0);
}

TEST_CASE("fits recover exact models") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> lin, ex, pw;
  for (double t : x) {
    lin.push_back(2.0 - 0.5 * t);
    ex.push_back(3.0 * std::exp(-1.7 * t));
    pw.push_back(0.2 * std::pow(t, 1.5));
  }
  const auto l = linear_fit(x, lin);
  CHECK(l.slope == doctest::Approx(-0.5));
  CHECK(l.intercept == doctest::Approx(2.0));
  CHECK(l.r2 == doctest::Approx(1.0));
  CHECK(l.relative_residual < 1e-6);
  const auto e = exponential_fit(x, ex);
  CHECK(e.rate == doctest::Approx(1.7));
  CHECK(e.prefactor == doctest::Approx(3.0));
  const auto p = power_fit(x, pw);
  CHECK(p.exponent == doctest::Approx(1.5));
  CHECK(p.prefactor == doctest::Approx(0.2));
  const auto s = scale_fit(x, pw);
  CHECK(s.relative_residual > 0.0);
  CHECK(scale_fit(x, lin).scale == doctest::Approx((2.0 * 15 - 0.5 * 55) / 55.0));
  CHECK(strictly_decreasing(lin));
  CHECK_FALSE(strictly_decreasing(pw));
  CHECK(non_increasing(std::vector<double>{1.0, 1.0, 0.5}));
  CHECK(non_increasing(std::vector<double>{1.0, 1.05}, 0.1));
}
