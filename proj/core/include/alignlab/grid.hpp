#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "alignlab/kernels.hpp"
#include "alignlab/torus.hpp"

namespace alignlab {

/// Uniform periodic grid with nodes x_i = i * h on the torus.
struct GridSpec {
  TorusGeometry geom;
  std::array<int, 2> n{1, 1};

  GridSpec() = default;
  GridSpec(const TorusGeometry& g, int n0, int n1 = 1);

  int size() const { return n[0] * n[1]; }
  double h(int axis = 0) const { return geom.period[axis] / n[axis]; }
  double cell_volume() const { return geom.dim == 1 ? h(0) : h(0) * h(1); }
  Vec node(int idx) const;
  int index(int i, int j = 0) const;
  std::vector<Vec> nodes() const;

  bool operator==(const GridSpec& o) const;
};

/// Scalar samples on a GridSpec.
struct GridField {
  GridSpec grid;
  std::vector<double> values;
  double time = 0.0;

  GridField() = default;
  explicit GridField(const GridSpec& g, double fill = 0.0);
  GridField(const GridSpec& g, std::vector<double> v, double t = 0.0);

  static GridField from_function(const GridSpec& g, const std::function<double(const Vec&)>& f);

  double integral() const;
  double min() const;
  double max() const;
};

/// Vector samples (one Vec per node).
struct VectorGridField {
  GridSpec grid;
  std::vector<Vec> values;
};

/// Periodic multilinear interpolation of grid samples.
double sample_field(const GridField& field, const Vec& point);
std::vector<double> sample_field(const GridField& field, std::span<const Vec> points);

/// Circulant table of a radial kernel on the grid lattice; convolves grid fields by
/// trapezoidal quadrature (exact for trigonometric polynomials below Nyquist).
class GridConvolver {
 public:
  GridConvolver(const CommunicationKernel& kernel, const GridSpec& grid);
  /// Discretely normalized mollifier weights (weights sum to one).
  GridConvolver(const Mollifier& mollifier, const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  /// out_i = sum_j w(x_i - x_j) in_j (w includes the quadrature weight).
  std::vector<double> apply(std::span<const double> in) const;
  /// Same, at arbitrary points (kernel reevaluated off the lattice).
  double weight(int lattice_offset) const { return table_[lattice_offset]; }
  /// Sum of all weights, i.e. the quadrature of the kernel.
  double total_weight() const;

 private:
  GridSpec grid_;
  std::vector<double> table_;  // indexed by lattice displacement (i0 + n0 * i1)
};

}  // namespace alignlab
