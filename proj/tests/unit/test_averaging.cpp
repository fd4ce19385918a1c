#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "alignlab/averaging.hpp"
#include "alignlab/error.hpp"
#include "alignlab/fitting.hpp"
#include "alignlab/metrics.hpp"

using namespace alignlab;

namespace {

constexpr double kPi = std::numbers::pi;

const TorusGeometry kT1(1, 1.0);
const TorusGeometry kT2(2, 1.0);

DensityView random_atoms(std::mt19937_64& rng, const TorusGeometry& g, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> x(n);
  std::vector<double> m(n);
  for (int i = 0; i < n; ++i) {
    x[i] = {u(rng), g.dim == 2 ? u(rng) : 0.0};
    m[i] = 0.2 + u(rng);
  }
  return DensityView::atoms(g, std::move(x), std::move(m));
}

std::vector<Vec> random_velocities(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  std::vector<Vec> v(n);
  for (auto& vi : v) vi = {nd(rng), nd(rng)};
  return v;
}

AveragingModel two_piece_segregation(const TorusGeometry& g) {
  const GridSpec grid = g.dim == 2 ? GridSpec(g, 32, 32) : GridSpec(g, 32);
  GridField g1 = GridField::from_function(grid, [](const Vec& x) { return 0.5 * (1.0 + std::cos(2 * kPi * x[0])); });
  GridField g2 = GridField::from_function(grid, [](const Vec& x) { return 0.5 * (1.0 - std::cos(2 * kPi * x[0])); });
  return AveragingModel::segregation({g1, g2});
}

std::vector<AveragingModel> all_variants(const TorusGeometry& g) {
  const auto k = CommunicationKernel::inverse_power(2.0, g);
  return {AveragingModel::cs_mt(k), AveragingModel::favre(k), AveragingModel::mphi(k, 32),
          two_piece_segregation(g)};
}

}  // namespace

TEST_CASE("single atom: the CS/MT kernel is 1/M everywhere") {
  const auto k = CommunicationKernel::inverse_power(3.0, kT1);
  const auto rho = DensityView::atoms(kT1, {{0.3, 0.0}}, {2.5});
  const std::vector<Vec> X{{0.0, 0.0}, {0.3, 0.0}, {0.71, 0.0}};
  const auto K = kernel_matrix(AveragingModel::cs_mt(k), rho, X, rho.points);
  for (std::size_t i = 0; i < X.size(); ++i) CHECK(K(i, 0) == doctest::Approx(1.0 / 2.5).epsilon(1e-15));
}

TEST_CASE("one-piece segregation is the global mean") {
  const GridSpec grid(kT1, 16);
  const auto model = AveragingModel::segregation({GridField(grid, 1.0)});
  std::mt19937_64 rng(3);
  const auto rho = random_atoms(rng, kT1, 7);
  const auto K = kernel_matrix(model, rho, rho.points, rho.points);
  for (std::size_t i = 0; i < K.rows; ++i)
    for (std::size_t j = 0; j < K.cols; ++j)
      CHECK(K(i, j) == doctest::Approx(1.0 / rho.total_mass()).epsilon(1e-14));
}

TEST_CASE("two equal masses: direct formula for the CS/MT kernel") {
  const auto k = CommunicationKernel::inverse_power(4.0, kT1);
  const double d = 0.23;
  const auto rho = DensityView::atoms(kT1, {{0.1, 0.0}, {0.1 + d, 0.0}}, {0.5, 0.5});
  const auto K = kernel_matrix(AveragingModel::cs_mt(k), rho, rho.points, rho.points);
  const double expected = k(d) / (0.5 * k(0.0) + 0.5 * k(d));
  CHECK(K(0, 1) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(K(1, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("constants are fixed points of every averaging variant") {
  for (const auto* geom : {&kT1, &kT2}) {
    std::mt19937_64 rng(4);
    const auto rho = random_atoms(rng, *geom, 9);
    const std::vector<Vec> v(rho.size(), Vec{0.37, -1.2});
    std::vector<Vec> eval{{0.05, 0.9}, {0.5, 0.5}, {0.77, 0.12}};
    for (auto& p : eval) p = wrap(p, *geom);
    for (const auto& model : all_variants(*geom)) {
      const auto out = velocity_average(model, rho, v, eval);
      for (const auto& o : out) {
        CHECK(std::abs(o[0] - 0.37) < 1e-10);
        if (geom->dim == 2) CHECK(std::abs(o[1] + 1.2) < 1e-10);
      }
    }
  }
}

TEST_CASE("odd pair: the average vanishes at the midpoint") {
  const auto k = CommunicationKernel::inverse_power(1.0, kT1);
  // mirror-symmetric about x = 1/2, which is also a node of the Mphi quadrature grid
  const auto rho = DensityView::atoms(kT1, {{0.375, 0.0}, {0.625, 0.0}}, {0.5, 0.5});
  const std::vector<Vec> v{{1.0, 0.0}, {-1.0, 0.0}};
  const std::vector<Vec> mid{{0.5, 0.0}};
  for (const auto& model : {AveragingModel::cs_mt(k), AveragingModel::mphi(k, 64)})
    CHECK(std::abs(velocity_average(model, rho, v, mid)[0][0]) < 1e-12);
}

TEST_CASE("three particles match a brute-force double loop") {
  std::mt19937_64 rng(5);
  const auto k = CommunicationKernel::inverse_power(1.5, kT2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rho = random_atoms(rng, kT2, 3);
    const auto v = random_velocities(rng, 3);
    const auto out = velocity_average(AveragingModel::cs_mt(k), rho, v, rho.points);
    for (int i = 0; i < 3; ++i) {
      double den = 0.0;
      for (int j = 0; j < 3; ++j) {
        const Vec d = rho.points[i] - rho.points[j];
        double dx = d[0] - std::round(d[0]), dy = d[1] - std::round(d[1]);
        den += rho.masses[j] * std::pow(1.0 + dx * dx + dy * dy, -1.5);
      }
      for (int c = 0; c < 2; ++c) {
        double num = 0.0;
        for (int j = 0; j < 3; ++j) {
          const Vec d = rho.points[i] - rho.points[j];
          double dx = d[0] - std::round(d[0]), dy = d[1] - std::round(d[1]);
          num += rho.masses[j] * std::pow(1.0 + dx * dx + dy * dy, -1.5) / den * v[j][c];
        }
        CHECK(std::abs(out[i][c] - num) < 1e-12);
      }
    }
  }
}

TEST_CASE("right stochasticity per variant") {
  std::mt19937_64 rng(6);
  const auto k = CommunicationKernel::inverse_power(2.0, kT1);
  const auto rho = random_atoms(rng, kT1, 12);
  CHECK(check_right_stochastic(AveragingModel::cs_mt(k), rho) < 1e-14);
  CHECK(check_right_stochastic(two_piece_segregation(kT1), rho) <= 1e-10);

  // Mphi against a random grid density on 128 nodes; inner quadrature at 256
  const GridSpec grid(kT1, 128);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  GridField rg(grid);
  for (double& r : rg.values) r = u(rng);
  CHECK(check_right_stochastic(AveragingModel::mphi(k, 128), DensityView::on_grid(rg)) <= 1e-8);
}

TEST_CASE("kernel entries are nonnegative") {
  std::mt19937_64 rng(7);
  const auto rho = random_atoms(rng, kT1, 6);
  for (const auto& model : all_variants(kT1)) {
    const auto K = kernel_matrix(model, rho, rho.points, rho.points);
    for (double e : K.data) CHECK(e >= 0.0);
  }
}

TEST_CASE("vanishing rho_phi raises a division hazard") {
  const CommunicationKernel hat([](double r) { return std::max(0.0, 1.0 - 10.0 * r); }, "hat", 0,
                                0.0, false);
  const auto rho = DensityView::atoms(kT1, {{0.0, 0.0}}, {1.0});
  const std::vector<Vec> far{{0.5, 0.0}};
  CHECK_THROWS_AS(kernel_matrix(AveragingModel::cs_mt(hat), rho, far, rho.points), DivisionHazard);
  const std::vector<Vec> v{{1.0, 0.0}};
  CHECK_THROWS_AS(velocity_average(AveragingModel::cs_mt(hat), rho, v, far), DivisionHazard);
}

TEST_CASE("segregation pieces must form a partition of unity") {
  const GridSpec grid(kT1, 8);
  CHECK_THROWS_AS(AveragingModel::segregation({GridField(grid, 0.5), GridField(grid, 0.4)}),
                  InvalidArgument);
  CHECK_THROWS_AS(AveragingModel::segregation({GridField(grid, 1.5), GridField(grid, -0.5)}),
                  InvalidArgument);
}

TEST_CASE("Favre average: constants, uniform density and the Fourier oracle") {
  const GridSpec grid(kT1, 64);
  const CommunicationKernel k([](double r) { return 1.0 + 0.5 * std::cos(2 * kPi * r); }, "mode", 8,
                              0.5, false);
  const GridField rho = GridField::from_function(grid, [](const Vec& x) { return 1.0 + 0.3 * std::sin(2 * kPi * x[0]); });
  const auto uc = favre_average(k, rho, GridField(grid, 0.8));
  for (double v : uc.values) CHECK(v == doctest::Approx(0.8).epsilon(1e-13));

  // uniform rho = 1: rho_phi = 1, (u rho)_phi = sin / 4
  const GridField u = GridField::from_function(grid, [](const Vec& x) { return std::sin(2 * kPi * x[0]); });
  const auto uf = favre_average(k, GridField(grid, 1.0), u);
  for (int i = 0; i < grid.size(); ++i) CHECK(std::abs(uf.values[i] - 0.25 * u.values[i]) < 1e-13);

  // uniform rho with a general kernel: u_phi / |phi|_1
  const auto kp = CommunicationKernel::inverse_power(3.0, kT1);
  const GridConvolver conv(kp, grid);
  const auto up = conv.apply(u.values);
  const auto uf2 = favre_average(kp, GridField(grid, 2.0), u);
  for (int i = 0; i < grid.size(); ++i)
    CHECK(std::abs(uf2.values[i] - up[i] / conv.total_weight()) < 1e-13);
}

TEST_CASE("special mollified velocity fixes constants and symmetric points") {
  const GridSpec grid(kT1, 200);
  const GridField rho = GridField::from_function(grid, [](const Vec& x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  const auto uc = special_mollified_velocity(rho, GridField(grid, -0.4), Mollifier(0.05, 1));
  for (double v : uc.values) CHECK(v == doctest::Approx(-0.4).epsilon(1e-13));

  // sawtooth u = x - 1/2 on uniform rho: at x = 1/2 the even mollifier returns u exactly
  const GridField saw = GridField::from_function(grid, [](const Vec& x) { return x[0] - 0.5; });
  const auto ud = special_mollified_velocity(GridField(grid, 1.0), saw, Mollifier(0.05, 1));
  CHECK(std::abs(ud.values[100]) < 1e-13);
}

TEST_CASE("mollification error scales linearly in delta") {
  // Lacunary trigonometric u: amplitudes 2^-n on modes 2^n. Smooth after truncation, but the error
  // stays in the linear regime and err/delta is invariant under halving delta.
  const GridSpec grid(kT1, 4096);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ph(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> th(11);
    for (double& t : th) t = ph(rng);
    const double amp = 0.5 + ph(rng), r1 = 0.6 * ph(rng) - 0.3, p = ph(rng);
    const GridField rho = GridField::from_function(grid, [&](const Vec& x) {
      return 1.0 + r1 * std::cos(2 * kPi * (x[0] + p));
    });
    const GridField u = GridField::from_function(grid, [&](const Vec& x) {
      double acc = 0.0;
      for (int n = 0; n <= 10; ++n) acc += amp * std::ldexp(1.0, -n) * std::cos(2 * kPi * (std::ldexp(x[0], n) + th[n]));
      return acc;
    });
    std::vector<double> ratio;
    for (double delta : {0.1, 0.05, 0.025}) {
      const auto ud = special_mollified_velocity(rho, u, Mollifier(delta, 1));
      double err = 0.0;
      for (int i = 0; i < grid.size(); ++i) err += std::abs(ud.values[i] - u.values[i]) * rho.values[i] * grid.h();
      ratio.push_back(err / delta);
    }
    const double hi = *std::max_element(ratio.begin(), ratio.end());
    const double lo = *std::min_element(ratio.begin(), ratio.end());
    INFO("ratios " << ratio[0] << " " << ratio[1] << " " << ratio[2]);
    CHECK(hi / lo < 2.0);
  }
}

TEST_CASE("kernel perturbation is linear in the W1 displacement") {
  const auto k = CommunicationKernel::inverse_power(2.0, kT1);
  const auto model = AveragingModel::cs_mt(k);
  const std::vector<Vec> pts{{0.1, 0.0}, {0.35, 0.0}, {0.6, 0.0}, {0.8, 0.0}};
  const std::vector<double> m{0.3, 0.2, 0.25, 0.25};
  const auto base = DensityView::atoms(kT1, pts, m);
  std::vector<Vec> eval;
  for (int i = 0; i < 20; ++i) eval.push_back({0.05 * i, 0.0});
  const auto K0 = kernel_matrix(model, base, eval, eval);
  std::vector<double> w1s, diffs;
  for (double eta : {1e-2, 1e-3, 1e-4}) {
    auto moved = pts;
    moved[1][0] += eta;
    const auto rho = DensityView::atoms(kT1, moved, m);
    const auto K = kernel_matrix(model, rho, eval, eval);
    double d = 0.0;
    for (std::size_t i = 0; i < K.data.size(); ++i) d = std::max(d, std::abs(K.data[i] - K0.data[i]));
    std::vector<double> p0, p1;
    for (const auto& p : pts) p0.push_back(p[0]);
    for (const auto& p : moved) p1.push_back(p[0]);
    w1s.push_back(w1_circle(Measure1D::atoms(1.0, p0, m), Measure1D::atoms(1.0, p1, m)));
    diffs.push_back(d);
  }
  const PowerFit fit = power_fit(w1s, diffs);
  CHECK(fit.exponent == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("x-derivatives of the CS/MT kernel stay bounded over random densities") {
  // A Bochner square is smooth on the circle; minimal-image power laws have a slope jump at the
  // antipode that a finite-difference second derivative would pick up.
  const auto k = bochner_square(
      CommunicationKernel([](double r) { return std::exp(std::cos(2 * kPi * r)); }, "exp-cos", 8,
                          std::exp(-1.0), false),
      kT1, 128);
  const auto model = AveragingModel::cs_mt(k);
  std::mt19937_64 rng(9);
  const double h = 1e-3;
  std::vector<double> d1, d2;
  for (int trial = 0; trial < 20; ++trial) {
    auto rho = random_atoms(rng, kT1, 10);
    const double scale = 1.0 / rho.total_mass();
    for (double& mi : rho.masses) mi *= scale;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double x = 0.04 * i;
      const std::vector<Vec> X{{wrap({x - h, 0.0}, kT1)}, {x, 0.0}, {wrap({x + h, 0.0}, kT1)}};
      const auto K = kernel_matrix(model, rho, X, rho.points);
      for (std::size_t j = 0; j < rho.size(); ++j) {
        m1 = std::max(m1, std::abs(K(2, j) - K(0, j)) / (2 * h));
        m2 = std::max(m2, std::abs(K(2, j) - 2 * K(1, j) + K(0, j)) / (h * h));
      }
    }
    d1.push_back(m1);
    d2.push_back(m2);
  }
  // uniform in the density: the spread over the 20 draws stays within a small factor
  INFO("d1 " << *std::max_element(d1.begin(), d1.end()) << " d2 " << *std::max_element(d2.begin(), d2.end()));
  CHECK(*std::max_element(d1.begin(), d1.end()) < 3.0 * *std::min_element(d1.begin(), d1.end()));
  CHECK(*std::max_element(d2.begin(), d2.end()) < 3.0 * *std::min_element(d2.begin(), d2.end()));
  CHECK(std::isfinite(*std::max_element(d2.begin(), d2.end())));
}

// ---- spectral gap --------------------------------------------------------------------------

namespace {

// Largest Rayleigh quotient of the symmetrized weighted operator on the zero rho-mean subspace,
// from a dense eigendecomposition built directly from the kernel profile.
double dense_lambda_max(const CommunicationKernel& k, const GridField& rho, const GridField& w) {
  const GridSpec& g = rho.grid;
  const int n = g.size();
  const double h = g.cell_volume();
  Eigen::MatrixXd phi(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) phi(i, j) = k(periodic_distance(g.node(i), g.node(j), g.geom));
  Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(rho.values.data(), n);
  Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.values.data(), n);
  const Eigen::VectorXd rp = h * (phi * r);
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) = 0.5 * (wv(i) + wv(j)) * r(i) * r(j) * h * h * phi(i, j);
  const Eigen::VectorXd kd = (wv.array() * rp.array() * r.array() * h).sqrt();
  const Eigen::MatrixXd M = kd.cwiseInverse().asDiagonal() * S * kd.cwiseInverse().asDiagonal();
  const Eigen::VectorXd c = (r * h).cwiseQuotient(kd);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd B = Q.rightCols(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * M * B);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("spectral gap of a constant kernel is one") {
  const GridSpec grid(kT1, 16);
  const GridField rho = GridField::from_function(grid, [](const Vec& x) { return 1.0 + 0.4 * std::cos(2 * kPi * x[0]); });
  const auto r = spectral_gap_estimate(CommunicationKernel::constant(0.7), rho, GridField(grid, 2.0));
  CHECK(r.epsilon0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral gap matches a dense eigensolver on toy grids") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (const auto& k : {CommunicationKernel::inverse_power(1.0, kT1),
                        CommunicationKernel::inverse_power(8.0, kT1),
                        bochner_square(CommunicationKernel([](double r) { return 1.0 + 0.5 * std::cos(2 * kPi * r); },
                                                           "mode", 8, 0.5, false),
                                       kT1, 64)}) {
    for (int trial = 0; trial < 3; ++trial) {
      const GridSpec grid(kT1, 8);
      GridField rho(grid), w(grid);
      for (double& v : rho.values) v = u(rng);
      for (double& v : w.values) v = u(rng);
      const auto est = spectral_gap_estimate(k, rho, w, 1e-12);
      const double oracle = dense_lambda_max(k, rho, w);
      CHECK(std::abs(est.lambda_max - oracle) < 1e-8);
      CHECK(est.epsilon0 > 0.0);
    }
  }
}

TEST_CASE("spectral gap is invariant under scaling the weight") {
  const GridSpec grid(kT1, 16);
  const auto k = CommunicationKernel::inverse_power(2.0, kT1);
  const GridField rho = GridField::from_function(grid, [](const Vec& x) { return 1.0 + 0.3 * std::sin(2 * kPi * x[0]); });
  const GridField w = GridField::from_function(grid, [](const Vec& x) { return 1.0 + 0.2 * std::cos(2 * kPi * x[0]); });
  GridField w3 = w;
  for (double& v : w3.values) v *= 3.0;
  const double a = spectral_gap_estimate(k, rho, w, 1e-12).epsilon0;
  const double b = spectral_gap_estimate(k, rho, w3, 1e-12).epsilon0;
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("constant-weight gap sits above the kernel floor bound") {
  const GridSpec grid(kT1, 32);
  const auto k = CommunicationKernel::inverse_power(1.0, kT1);
  const GridField rho = GridField::from_function(grid, [](const Vec& x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  const auto rp = GridConvolver(k, grid).apply(rho.values);
  const double bound = k.c0() * rho.integral() / *std::max_element(rp.begin(), rp.end());
  CHECK(spectral_gap_estimate(k, rho, GridField(grid, 1.0)).epsilon0 >= bound);
}

TEST_CASE("spectral gap reports non-convergence") {
  const GridSpec grid(kT1, 16);
  const auto k = CommunicationKernel::inverse_power(1.0, kT1);
  const GridField rho = GridField::from_function(grid, [](const Vec& x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  CHECK_THROWS_AS(spectral_gap_estimate(k, rho, GridField(grid, 1.0), 1e-14, 2), IterationLimit);
  CHECK_THROWS_AS(spectral_gap_estimate(k, GridField(grid, 0.0), GridField(grid, 1.0)), DivisionHazard);
}
