#pragma once

#include <array>
#include <cmath>

namespace alignlab {

/// Point or vector in up to two dimensions; unused components stay zero.
using Vec = std::array<double, 2>;

inline Vec operator+(Vec a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(Vec a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }
inline Vec& operator+=(Vec& a, const Vec& b) {
  a[0] += b[0];
  a[1] += b[1];
  return a;
}
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

/// Flat torus T^n, n in {1, 2}, with a period per axis.
struct TorusGeometry {
  int dim = 1;
  std::array<double, 2> period{1.0, 1.0};

  TorusGeometry() = default;
  TorusGeometry(int d, double p);
  TorusGeometry(int d, std::array<double, 2> p);

  double volume() const { return dim == 1 ? period[0] : period[0] * period[1]; }
  /// Largest minimal-image distance between two points.
  double half_diameter() const;
};

/// Maps a point into the fundamental domain [0, period).
Vec wrap(Vec p, const TorusGeometry& geom);

/// Minimal-image representative of a - b; each component lies in (-period/2, period/2].
Vec periodic_displacement(const Vec& a, const Vec& b, const TorusGeometry& geom);

double periodic_distance(const Vec& a, const Vec& b, const TorusGeometry& geom);

/// Scalar minimal image of d for a single period.
inline double minimal_image(double d, double period) {
  d -= period * std::floor(d / period);  // [0, period)
  if (d > 0.5 * period) d -= period;     // (-period/2, period/2]
  return d;
}

}  // namespace alignlab
