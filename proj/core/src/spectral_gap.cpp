#include <cmath>
#include <numeric>
#include <random>

#include "alignlab/averaging.hpp"
#include "alignlab/error.hpp"

namespace alignlab {

namespace {

// y <- P y with P the Euclidean projector orthogonal to c.
void project(std::vector<double>& y, const std::vector<double>& c, double cc) {
  const double a = std::inner_product(y.begin(), y.end(), c.begin(), 0.0) / cc;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= a * c[i];
}

double normalize(std::vector<double>& y) {
  const double nrm = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
  if (nrm > 0.0)
    for (double& v : y) v /= nrm;
  return nrm;
}

struct PowerResult {
  double lambda;
  int iterations;
  double residual;
  bool converged;
};

// Dominant eigenvalue of P (A + shift I) P restricted to range(P).
PowerResult power_iteration(const std::vector<double>& A, const std::vector<double>& c, double cc,
                            double shift, double tol, int max_iterations, double scale) {
  const std::size_t n = c.size();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> y(n), z(n);
  for (double& v : y) v = uni(rng);
  project(y, c, cc);
  normalize(y);
  double lambda = 0.0, residual = INFINITY;
  for (int it = 1; it <= max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = shift * y[i];
      for (std::size_t j = 0; j < n; ++j) acc += A[i * n + j] * y[j];
      z[i] = acc;
    }
    project(z, c, cc);
    lambda = std::inner_product(y.begin(), y.end(), z.begin(), 0.0);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) r2 += (z[i] - lambda * y[i]) * (z[i] - lambda * y[i]);
    residual = std::sqrt(r2);
    const double znorm = normalize(z);
    // P A P vanishes identically (e.g. constant kernels): the top eigenvalue is the shift.
    if (znorm <= 1e-14 * scale) return {shift, it, 0.0, true};
    if (residual <= tol * std::max(std::abs(lambda), 1e-14 * scale)) return {lambda, it, residual, true};
    y.swap(z);
  }
  return {lambda, max_iterations, residual, false};
}

}  // namespace

SpectralGapResult spectral_gap_estimate(const CommunicationKernel& k, const GridField& rho,
                                        const GridField& w, double tol, int max_iterations) {
  if (!(rho.grid == w.grid)) throw InvalidGrid("spectral_gap_estimate needs rho and w on one grid");
  const GridSpec& g = rho.grid;
  const int n = g.size();
  const double h = g.cell_volume();
  const GridConvolver conv(k, g);
  const auto rp = conv.apply(rho.values);

  // kappa = w rho_phi rho; Gram matrix G = diag(kappa h); y = G^{1/2} u.
  std::vector<double> gsqrt(n);
  for (int i = 0; i < n; ++i) {
    const double kappa = w.values[i] * rp[i] * rho.values[i];
    if (!(kappa > kDivisionHazard))
      throw DivisionHazard("kappa = w rho_phi rho vanishes at grid node " + std::to_string(i));
    gsqrt[i] = std::sqrt(kappa * h);
  }
  std::vector<double> A(static_cast<std::size_t>(n) * n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const int d = g.index((i % g.n[0]) - (j % g.n[0]), (i / g.n[0]) - (j / g.n[0]));
      const double phi_ij = conv.weight(d) / h;
      const double s = 0.5 * (w.values[i] + w.values[j]) * rho.values[i] * rho.values[j] * h * h *
                       phi_ij;
      A[static_cast<std::size_t>(i) * n + j] = s / (gsqrt[i] * gsqrt[j]);
      row += std::abs(A[static_cast<std::size_t>(i) * n + j]);
    }
    scale = std::max(scale, row);
  }
  // Zero rho-mean: b = rho h, constraint b^T G^{-1/2} y = 0.
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[i] = rho.values[i] * h / gsqrt[i];
  const double cc = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);

  PowerResult r = power_iteration(A, c, cc, 0.0, tol, max_iterations, scale);
  if (r.converged && r.lambda < 0.0) {
    // Dominant eigenvalue is negative; shift it to the bottom of the spectrum.
    const double shift = -r.lambda;
    PowerResult s = power_iteration(A, c, cc, shift, tol, max_iterations, scale);
    s.lambda -= shift;
    s.iterations += r.iterations;
    r = s;
  }
  if (!r.converged)
    throw IterationLimit("spectral gap power iteration did not converge", r.residual);
  return {1.0 - r.lambda, r.lambda, r.iterations, r.residual};
}

}  // namespace alignlab
