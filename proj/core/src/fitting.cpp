#include "alignlab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "alignlab/error.hpp"

namespace alignlab {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit needs equally many abscissae and values");
  if (x.size() < 2) throw InvalidArgument("fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidArgument("fit data not finite");
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit abscissae are all equal");
  LinearFit f;
  f.points = static_cast<int>(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.relative_residual = std::sqrt(std::max(0.0, 1.0 - f.r2));
  return f;
}

namespace {

std::vector<double> logs(std::span<const double> v, const char* what) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw InvalidArgument(std::string(what) + " must be positive for a log fit");
    out[i] = std::log(v[i]);
  }
  return out;
}

}  // namespace

ExponentialFit exponential_fit(std::span<const double> t, std::span<const double> y) {
  const auto ly = logs(y, "values");
  ExponentialFit f;
  f.line = linear_fit(t, ly);
  f.rate = -f.line.slope;
  f.prefactor = std::exp(f.line.intercept);
  return f;
}

PowerFit power_fit(std::span<const double> x, std::span<const double> y) {
  const auto lx = logs(x, "abscissae");
  const auto ly = logs(y, "values");
  PowerFit f;
  f.line = linear_fit(lx, ly);
  f.exponent = f.line.slope;
  f.prefactor = std::exp(f.line.intercept);
  return f;
}

ScaleFit scale_fit(std::span<const double> g, std::span<const double> y) {
  if (g.size() != y.size() || g.empty()) throw InvalidArgument("scale fit needs matching data");
  double gg = 0.0, gy = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gg += g[i] * g[i];
    gy += g[i] * y[i];
    yy += y[i] * y[i];
  }
  if (!(gg > 0.0)) throw InvalidArgument("scale fit reference vanishes");
  ScaleFit f;
  f.scale = gy / gg;
  double rr = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) rr += (y[i] - f.scale * g[i]) * (y[i] - f.scale * g[i]);
  f.relative_residual = yy > 0.0 ? std::sqrt(rr / yy) : 0.0;
  return f;
}

bool strictly_decreasing(std::span<const double> y) {
  for (std::size_t i = 1; i < y.size(); ++i)
    if (!(y[i] < y[i - 1])) return false;
  return true;
}

bool non_increasing(std::span<const double> y, double tol) {
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[i - 1] + tol) return false;
  return true;
}

}  // namespace alignlab
