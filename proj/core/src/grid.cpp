#include "alignlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alignlab/error.hpp"

namespace alignlab {

GridSpec::GridSpec(const TorusGeometry& g, int n0, int n1) : geom(g), n{n0, g.dim == 2 ? n1 : 1} {
  if (n0 < 2 || (g.dim == 2 && n1 < 2)) throw InvalidGrid("grid needs at least 2 nodes per axis");
}

Vec GridSpec::node(int idx) const {
  const int i = idx % n[0];
  const int j = idx / n[0];
  return {i * h(0), geom.dim == 2 ? j * h(1) : 0.0};
}

int GridSpec::index(int i, int j) const {
  i = ((i % n[0]) + n[0]) % n[0];
  j = ((j % n[1]) + n[1]) % n[1];
  return i + n[0] * j;
}

std::vector<Vec> GridSpec::nodes() const {
  std::vector<Vec> out(size());
  for (int k = 0; k < size(); ++k) out[k] = node(k);
  return out;
}

bool GridSpec::operator==(const GridSpec& o) const {
  return geom.dim == o.geom.dim && n == o.n && geom.period == o.geom.period;
}

GridField::GridField(const GridSpec& g, double fill) : grid(g), values(g.size(), fill) {}

GridField::GridField(const GridSpec& g, std::vector<double> v, double t)
    : grid(g), values(std::move(v)), time(t) {
  if (static_cast<int>(values.size()) != grid.size())
    throw InvalidGrid("field sample count does not match its grid");
}

GridField GridField::from_function(const GridSpec& g, const std::function<double(const Vec&)>& f) {
  GridField out(g);
  for (int k = 0; k < g.size(); ++k) out.values[k] = f(g.node(k));
  return out;
}

double GridField::integral() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * grid.cell_volume();
}

double GridField::min() const { return *std::min_element(values.begin(), values.end()); }
double GridField::max() const { return *std::max_element(values.begin(), values.end()); }

double sample_field(const GridField& field, const Vec& point) {
  const GridSpec& g = field.grid;
  const Vec p = wrap(point, g.geom);
  const double fx = p[0] / g.h(0);
  int i0 = static_cast<int>(std::floor(fx));
  const double tx = fx - i0;
  const auto& v = field.values;
  if (g.geom.dim == 1) {
    const double a = v[g.index(i0)];
    const double b = v[g.index(i0 + 1)];
    return a + tx * (b - a);
  }
  const double fy = p[1] / g.h(1);
  int j0 = static_cast<int>(std::floor(fy));
  const double ty = fy - j0;
  const double a0 = v[g.index(i0, j0)], b0 = v[g.index(i0 + 1, j0)];
  const double a1 = v[g.index(i0, j0 + 1)], b1 = v[g.index(i0 + 1, j0 + 1)];
  const double lo = a0 + tx * (b0 - a0);
  const double hi = a1 + tx * (b1 - a1);
  return lo + ty * (hi - lo);
}

std::vector<double> sample_field(const GridField& field, std::span<const Vec> points) {
  std::vector<double> out(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) out[k] = sample_field(field, points[k]);
  return out;
}

GridConvolver::GridConvolver(const CommunicationKernel& kernel, const GridSpec& grid)
    : grid_(grid), table_(grid.size()) {
  const double w = grid.cell_volume();
  const Vec origin{0.0, 0.0};
  for (int k = 0; k < grid.size(); ++k)
    table_[k] = w * kernel(periodic_distance(grid.node(k), origin, grid.geom));
}

GridConvolver::GridConvolver(const Mollifier& mollifier, const GridSpec& grid)
    : grid_(grid), table_(grid.size()) {
  const Vec origin{0.0, 0.0};
  for (int k = 0; k < grid.size(); ++k)
    table_[k] = mollifier.at_displacement(periodic_displacement(grid.node(k), origin, grid.geom));
  const double total = std::accumulate(table_.begin(), table_.end(), 0.0);
  if (!(total > 0.0)) throw InvalidGrid("mollifier support is narrower than the grid spacing");
  for (double& t : table_) t /= total;
}

std::vector<double> GridConvolver::apply(std::span<const double> in) const {
  const int n0 = grid_.n[0], n1 = grid_.n[1];
  if (static_cast<int>(in.size()) != grid_.size()) throw InvalidGrid("convolution size mismatch");
  std::vector<double> out(in.size(), 0.0);
  if (n1 == 1) {
    for (int i = 0; i < n0; ++i) {
      double acc = 0.0;
      // split the circulant sweep to avoid a modulo in the inner loop
      for (int j = 0; j <= i; ++j) acc += table_[i - j] * in[j];
      for (int j = i + 1; j < n0; ++j) acc += table_[i - j + n0] * in[j];
      out[i] = acc;
    }
    return out;
  }
  for (int j1 = 0; j1 < n1; ++j1)
    for (int j0 = 0; j0 < n0; ++j0) {
      const double src = in[j0 + n0 * j1];
      if (src == 0.0) continue;
      for (int i1 = 0; i1 < n1; ++i1) {
        const int d1 = ((i1 - j1) % n1 + n1) % n1;
        for (int i0 = 0; i0 < n0; ++i0) {
          const int d0 = ((i0 - j0) % n0 + n0) % n0;
          out[i0 + n0 * i1] += table_[d0 + n0 * d1] * src;
        }
      }
    }
  return out;
}

double GridConvolver::total_weight() const {
  return std::accumulate(table_.begin(), table_.end(), 0.0);
}

}  // namespace alignlab
