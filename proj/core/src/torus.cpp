#include "alignlab/torus.hpp"

#include <algorithm>

#include "alignlab/error.hpp"

namespace alignlab {

TorusGeometry::TorusGeometry(int d, double p) : TorusGeometry(d, {p, p}) {}

TorusGeometry::TorusGeometry(int d, std::array<double, 2> p) : dim(d), period(p) {
  if (dim != 1 && dim != 2) throw InvalidArgument("torus dimension must be 1 or 2");
  if (!(period[0] > 0.0) || (dim == 2 && !(period[1] > 0.0)))
    throw InvalidArgument("torus period must be positive");
  if (dim == 1) period[1] = 1.0;
}

double TorusGeometry::half_diameter() const {
  if (dim == 1) return 0.5 * period[0];
  return 0.5 * std::hypot(period[0], period[1]);
}

Vec wrap(Vec p, const TorusGeometry& geom) {
  for (int a = 0; a < geom.dim; ++a) {
    p[a] -= geom.period[a] * std::floor(p[a] / geom.period[a]);
    if (p[a] >= geom.period[a]) p[a] = 0.0;  // floor rounding at the upper edge
  }
  if (geom.dim == 1) p[1] = 0.0;
  return p;
}

Vec periodic_displacement(const Vec& a, const Vec& b, const TorusGeometry& geom) {
  Vec d{0.0, 0.0};
  for (int k = 0; k < geom.dim; ++k) d[k] = minimal_image(a[k] - b[k], geom.period[k]);
  return d;
}

double periodic_distance(const Vec& a, const Vec& b, const TorusGeometry& geom) {
  // Built from |a - b| so that swapping the arguments gives the same bits.
  double sq = 0.0;
  for (int k = 0; k < geom.dim; ++k) {
    const double p = geom.period[k];
    double d = std::fmod(std::abs(a[k] - b[k]), p);
    d = std::min(d, p - d);
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace alignlab
