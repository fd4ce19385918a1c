#include "alignlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "alignlab/error.hpp"

namespace alignlab {

CommunicationKernel::CommunicationKernel(Profile profile, std::string family,
                                         int smoothness_order, double c0, bool fat_tail)
    : profile_(std::move(profile)),
      family_(std::move(family)),
      smoothness_order_(smoothness_order),
      c0_(c0),
      fat_tail_(fat_tail) {
  if (!profile_) throw InvalidArgument("communication kernel needs a profile");
  if (c0_ < 0.0) throw InvalidArgument("kernel lower bound c0 must be nonnegative");
}

CommunicationKernel CommunicationKernel::inverse_power(double beta, const TorusGeometry& geom) {
  if (!(beta > 0.0)) throw InvalidArgument("inverse_power kernel needs beta > 0");
  auto profile = [beta](double r) { return std::exp(-beta * std::log1p(r * r)); };
  const double c0 = profile(geom.half_diameter());
  // integral of (1+r^2)^(-beta) over [0, inf) diverges iff 2 beta <= 1
  return CommunicationKernel(profile, "inverse_power", 1000, c0, 2.0 * beta <= 1.0);
}

CommunicationKernel CommunicationKernel::constant(double c) {
  if (!(c > 0.0)) throw InvalidArgument("constant kernel needs a positive value");
  return CommunicationKernel([c](double) { return c; }, "constant", 1000, c, true);
}

void CommunicationKernel::validate(const TorusGeometry& geom, int samples) const {
  const double rmax = geom.half_diameter();
  double prev = profile_(0.0);
  for (int i = 0; i <= samples; ++i) {
    const double r = rmax * i / samples;
    const double v = profile_(r);
    std::ostringstream where;
    where << " at r=" << r << " (value " << v << ")";
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("kernel profile negative" + where.str());
    if (v > prev * (1.0 + 1e-12) + 1e-15)
      throw InvalidArgument("kernel profile increasing" + where.str());
    if (c0_ > 0.0 && v < c0_ * (1.0 - 1e-12))
      throw InvalidArgument("kernel profile below its lower bound c0" + where.str());
    prev = v;
  }
}

double kernel_eval(const CommunicationKernel& k, const Vec& a, const Vec& b,
                   const TorusGeometry& geom) {
  return k(periodic_distance(a, b, geom));
}

CommunicationKernel bochner_square(const CommunicationKernel& psi, const TorusGeometry& geom,
                                   int resolution) {
  if (resolution < 4) throw InvalidGrid("bochner_square needs a resolution of at least 4 points");
  if (geom.dim != 1) throw InvalidArgument("bochner_square is implemented on T^1 only");
  const int n = resolution;
  const double period = geom.period[0];
  const double h = period / n;

  std::vector<double> psi_s(n);
  double psi_min = psi(0.0);
  for (int j = 0; j < n; ++j) {
    psi_s[j] = psi(std::abs(minimal_image(j * h, period)));
    psi_min = std::min(psi_min, psi_s[j]);
  }
  if (!(psi_min > 0.0)) throw InvalidArgument("bochner_square needs inf psi > 0");

  std::vector<double> phi_s(n, 0.0);
  for (int m = 0; m < n; ++m) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += psi_s[j] * psi_s[((m - j) % n + n) % n];
    phi_s[m] = acc * h;
  }

  // Even real sequence: cosine coefficients of the trigonometric interpolant.
  const int half = n / 2;
  auto coeffs = std::make_shared<std::vector<double>>(half + 1, 0.0);
  for (int k = 0; k <= half; ++k) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += phi_s[j] * std::cos(2.0 * std::numbers::pi * k * j / n);
    double c = acc / n;
    if (k != 0 && !(n % 2 == 0 && k == half)) c *= 2.0;
    (*coeffs)[k] = c;
  }
  auto profile = [coeffs, period](double r) {
    // cos(k t) by the Chebyshev recurrence
    const double t = 2.0 * std::numbers::pi * r / period;
    const double c1 = std::cos(t);
    double ckm1 = 1.0, ck = c1;
    double acc = (*coeffs)[0];
    if (coeffs->size() > 1) acc += (*coeffs)[1] * c1;
    for (std::size_t k = 2; k < coeffs->size(); ++k) {
      const double next = 2.0 * c1 * ck - ckm1;
      ckm1 = ck;
      ck = next;
      acc += (*coeffs)[k] * ck;
    }
    return acc;
  };

  double c0 = *std::min_element(phi_s.begin(), phi_s.end());
  for (int i = 0; i <= 4 * n; ++i) c0 = std::min(c0, profile(0.5 * period * i / (4.0 * n)));
  c0 = std::max(c0, psi_min * psi_min * period);
  return CommunicationKernel(profile, "bochner", 1000, c0, true);
}

namespace {

double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// Integral of the unnormalized bump over the unit ball, composite Simpson in the radius.
double bump_integral(int dim) {
  const int n = 20000;
  const double h = 1.0 / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double jac = dim == 1 ? 2.0 : 2.0 * std::numbers::pi * r;
    acc += w * jac * bump(r * r);
  }
  return acc * h / 3.0;
}

}  // namespace

Mollifier::Mollifier(double delta, int dim) : delta_(delta), dim_(dim) {
  if (!(delta > 0.0)) throw InvalidArgument("mollifier scale delta must be positive");
  if (dim != 1 && dim != 2) throw InvalidArgument("mollifier dimension must be 1 or 2");
  static const double norm1 = bump_integral(1);
  static const double norm2 = bump_integral(2);
  scale_ = 1.0 / ((dim == 1 ? norm1 : norm2) * std::pow(delta, dim));
}

double Mollifier::at_displacement(const Vec& d) const {
  const double r2 = (d[0] * d[0] + (dim_ == 2 ? d[1] * d[1] : 0.0)) / (delta_ * delta_);
  return scale_ * bump(r2);
}

double mollifier_eval(const Mollifier& m, const Vec& x, const TorusGeometry& geom) {
  if (2.0 * m.delta() >= geom.period[0] || (geom.dim == 2 && 2.0 * m.delta() >= geom.period[1]))
    throw InvalidArgument("mollifier support does not fit in the torus");
  return m.at_displacement(periodic_displacement(x, Vec{0.0, 0.0}, geom));
}

}  // namespace alignlab
