#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "alignlab/error.hpp"
#include "alignlab/grid.hpp"
#include "alignlab/kernels.hpp"
#include "alignlab/torus.hpp"

using namespace alignlab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("periodic displacement uses the minimal image") {
  const TorusGeometry t1(1, 1.0);
  const Vec d = periodic_displacement({0.1, 0.0}, {0.9, 0.0}, t1);
  CHECK(d[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(periodic_distance({0.1, 0.0}, {0.9, 0.0}, t1) == doctest::Approx(0.2));
  CHECK(periodic_distance({0.3, 0.0}, {0.3, 0.0}, t1) == 0.0);

  const TorusGeometry t2(2, 1.0);
  CHECK(periodic_distance({0.1, 0.1}, {0.9, 0.9}, t2) == doctest::Approx(std::sqrt(0.08)));
}

TEST_CASE("displacement components lie in the half-open half period") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const TorusGeometry g(2, {1.0, 2.5});
  for (int i = 0; i < 1000; ++i) {
    const Vec a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const Vec d = periodic_displacement(wrap(a, g), wrap(b, g), g);
    for (int ax = 0; ax < 2; ++ax) {
      const double p = g.period[ax];
      CHECK(d[ax] > -0.5 * p);
      CHECK(d[ax] <= 0.5 * p);
      // a - b - d is a lattice vector
      const double k = (a[ax] - b[ax] - d[ax]) / p;
      CHECK(std::abs(k - std::round(k)) < 1e-9);
    }
  }
}

TEST_CASE("inverse-power kernel values") {
  const TorusGeometry g(2, 1.0);
  const auto k = CommunicationKernel::inverse_power(40.0, g);
  CHECK(kernel_eval(k, {0.2, 0.3}, {0.2, 0.3}, g) == 1.0);
  CHECK(k(0.5) == doctest::Approx(std::pow(1.25, -40.0)).epsilon(1e-14));
  CHECK(k.c0() == doctest::Approx(std::pow(1.5, -40.0)).epsilon(1e-12));
  k.validate(g);

  const auto c = CommunicationKernel::constant(0.7);
  CHECK(kernel_eval(c, {0.1, 0.9}, {0.6, 0.2}, g) == 0.7);
}

TEST_CASE("kernel evaluation is symmetric and translation invariant") {
  const TorusGeometry g(2, 1.0);
  const auto k = CommunicationKernel::inverse_power(3.0, g);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec a{u(rng), u(rng)}, b{u(rng), u(rng)}, t{u(rng), u(rng)};
    const double kab = kernel_eval(k, a, b, g);
    CHECK(kab == kernel_eval(k, b, a, g));
    CHECK(kernel_eval(k, wrap(a + t, g), wrap(b + t, g), g) == doctest::Approx(kab).epsilon(1e-12));
  }
}

TEST_CASE("validate rejects increasing or negative profiles") {
  const TorusGeometry g(1, 1.0);
  CommunicationKernel up([](double r) { return r; }, "up", 0, 0.0, false);
  CHECK_THROWS_AS(up.validate(g), InvalidArgument);
  CommunicationKernel neg([](double r) { return -1.0 - r; }, "neg", 0, 0.0, false);
  CHECK_THROWS_AS(neg.validate(g), InvalidArgument);
  CommunicationKernel low([](double r) { return 1.0 - r; }, "low", 0, 0.9, false);
  CHECK_THROWS_AS(low.validate(g), InvalidArgument);
}

TEST_CASE("bochner square of a constant is the constant") {
  const TorusGeometry g(1, 1.0);
  const auto phi = bochner_square(CommunicationKernel::constant(1.0), g, 64);
  for (double r : {0.0, 0.1, 0.37, 0.5}) CHECK(phi(r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bochner square multiplies Fourier coefficients") {
  // psi = 1 + cos(2 pi x)/2 has coefficients 1 and 1/4 on modes 0 and +-1,
  // so psi * psi = 1 + cos(2 pi x)/8.
  const TorusGeometry g(1, 1.0);
  const CommunicationKernel psi([](double r) { return 1.0 + 0.5 * std::cos(2.0 * kPi * r); },
                                "mode", 8, 0.5, false);
  const auto phi = bochner_square(psi, g, 256);
  for (int i = 0; i <= 50; ++i) {
    const double r = 0.01 * i;
    CHECK(phi(r) == doctest::Approx(1.0 + std::cos(2.0 * kPi * r) / 8.0).epsilon(1e-10));
  }
  CHECK(phi.c0() >= 0.25 - 1e-12);
}

TEST_CASE("bochner square of a mode sum matches the mode-wise oracle") {
  const TorusGeometry g(1, 1.0);
  const double a1 = 0.3, a2 = 0.1, a3 = 0.05;
  const CommunicationKernel psi(
      [=](double r) {
        return 1.0 + a1 * std::cos(2 * kPi * r) + a2 * std::cos(4 * kPi * r) + a3 * std::cos(6 * kPi * r);
      },
      "modes", 8, 0.5, false);
  const auto phi = bochner_square(psi, g, 256);
  // cos(2 pi k x) * cos(2 pi k x) = cos(2 pi k x) / 2 on the unit circle
  auto oracle = [=](double r) {
    return 1.0 + 0.5 * a1 * a1 * std::cos(2 * kPi * r) + 0.5 * a2 * a2 * std::cos(4 * kPi * r) +
           0.5 * a3 * a3 * std::cos(6 * kPi * r);
  };
  for (int i = 0; i <= 100; ++i) {
    const double r = 0.005 * i;
    CHECK(std::abs(phi(r) - oracle(r)) < 1e-10);
  }
}

TEST_CASE("bochner square preserves the squared integral") {
  const TorusGeometry g(1, 1.0);
  // smooth on the circle, so both quadratures are spectrally accurate
  const CommunicationKernel psi([](double r) { return std::exp(std::cos(2 * kPi * r)); }, "bump", 8,
                                std::exp(-1.0), false);
  const auto phi = bochner_square(psi, g, 512);
  const int n = 4096;
  double ipsi = 0.0, iphi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::abs(minimal_image(static_cast<double>(i) / n, 1.0));
    ipsi += psi(r) / n;
    iphi += phi(r) / n;
  }
  CHECK(iphi == doctest::Approx(ipsi * ipsi).epsilon(1e-10));
}

TEST_CASE("bochner square rejects coarse grids and kernels without a floor") {
  const TorusGeometry g(1, 1.0);
  CHECK_THROWS_AS(bochner_square(CommunicationKernel::constant(1.0), g, 3), InvalidGrid);
  const CommunicationKernel no_floor([](double r) { return std::max(0.0, 1.0 - 4.0 * r); }, "hat",
                                     0, 0.0, false);
  CHECK_THROWS_AS(bochner_square(no_floor, g, 64), InvalidArgument);
}

TEST_CASE("mollifier support, normalization and scaling") {
  const TorusGeometry g1(1, 1.0);
  const Mollifier m(0.1, 1);
  CHECK(mollifier_eval(m, {0.1, 0.0}, g1) == 0.0);
  CHECK(mollifier_eval(m, {0.5, 0.0}, g1) == 0.0);
  CHECK(mollifier_eval(m, {0.95, 0.0}, g1) > 0.0);  // wraps to -0.05

  const int n = 20000;
  double integral = 0.0;
  for (int i = 0; i < n; ++i) integral += mollifier_eval(m, {static_cast<double>(i) / n, 0.0}, g1) / n;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));

  const Mollifier half(0.05, 1);
  CHECK(mollifier_eval(half, {0.0, 0.0}, g1) ==
        doctest::Approx(2.0 * mollifier_eval(m, {0.0, 0.0}, g1)).epsilon(1e-14));

  const TorusGeometry g2(2, 1.0);
  const Mollifier m2(0.2, 2), m2h(0.1, 2);
  CHECK(mollifier_eval(m2h, {0.0, 0.0}, g2) ==
        doctest::Approx(4.0 * mollifier_eval(m2, {0.0, 0.0}, g2)).epsilon(1e-14));
  const int n2 = 400;
  double i2 = 0.0;
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j)
      i2 += mollifier_eval(m2, {static_cast<double>(i) / n2, static_cast<double>(j) / n2}, g2) / (n2 * n2);
  CHECK(i2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("grid convolution is exact for trigonometric polynomials") {
  const TorusGeometry g(1, 1.0);
  const GridSpec grid(g, 64);
  const CommunicationKernel k([](double r) { return 1.0 + 0.5 * std::cos(2 * kPi * r); }, "mode", 8,
                              0.5, false);
  const GridConvolver conv(k, grid);
  const GridField f = GridField::from_function(grid, [](const Vec& x) { return std::sin(2 * kPi * x[0]); });
  const auto out = conv.apply(f.values);
  // (1 + cos/2) * sin = sin / 4
  for (int i = 0; i < grid.size(); ++i)
    CHECK(out[i] == doctest::Approx(0.25 * f.values[i]).epsilon(1e-12).scale(1.0));
  CHECK(conv.total_weight() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("torus geometry validates its arguments") {
  CHECK_THROWS_AS(TorusGeometry(3, 1.0), InvalidArgument);
  CHECK_THROWS_AS(TorusGeometry(1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(TorusGeometry(2, {1.0, -1.0}), InvalidArgument);
}
