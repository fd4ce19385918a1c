#pragma once

// Helpers shared by the experiment translation units.

#include <cmath>
#include <numbers>
#include <string>

#include "alignlab/config.hpp"
#include "alignlab/error.hpp"
#include "alignlab/experiments.hpp"
#include "alignlab/grid.hpp"

namespace alignlab::detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// 1 + a cos(2 pi x / P).
inline GridField cosine_profile(const GridSpec& g, double a) {
  const double P = g.geom.period[0];
  return GridField::from_function(g, [&](const Vec& x) { return 1.0 + a * std::cos(kTwoPi * x[0] / P); });
}

/// A sin(2 pi x / P).
inline GridField sine_profile(const GridSpec& g, double A) {
  const double P = g.geom.period[0];
  return GridField::from_function(g, [&](const Vec& x) { return A * std::sin(kTwoPi * x[0] / P); });
}

/// Inverse of the standard normal CDF by bisection on erfc (absolute accuracy 1e-14).
inline double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int k = 0; k < 200 && hi - lo > 1e-14; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double frac(double x) { return x - std::floor(x); }

/// Uniform double in [0, 1) from 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal sample by Box-Muller (portable across standard libraries).
template <class Rng>
double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace alignlab::detail
