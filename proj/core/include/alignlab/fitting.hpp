#pragma once

#include <span>

namespace alignlab {

/// Least-squares line y = intercept + slope * x with goodness of fit.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// sqrt(1 - R^2); fits above kInconclusiveResidual are reported as inconclusive.
  double relative_residual = 0.0;
  int points = 0;
};

inline constexpr double kInconclusiveResidual = 0.2;

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// y ~ A exp(-rate t) by a log-linear fit; slope is -rate. Requires positive y.
struct ExponentialFit {
  double rate = 0.0;
  double prefactor = 0.0;
  LinearFit line;
};
ExponentialFit exponential_fit(std::span<const double> t, std::span<const double> y);

/// y ~ C x^exponent by a log-log fit. Requires positive x and y.
struct PowerFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  LinearFit line;
};
PowerFit power_fit(std::span<const double> x, std::span<const double> y);

/// C minimizing sum (y - C g)^2 and the relative residual ||y - C g|| / ||y||.
struct ScaleFit {
  double scale = 0.0;
  double relative_residual = 0.0;
};
ScaleFit scale_fit(std::span<const double> g, std::span<const double> y);

/// True when every entry is strictly below its predecessor.
bool strictly_decreasing(std::span<const double> y);
/// True when no entry exceeds its predecessor by more than tol (absolute).
bool non_increasing(std::span<const double> y, double tol = 0.0);

}  // namespace alignlab
