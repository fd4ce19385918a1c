#pragma once

#include <memory>
#include <span>
#include <vector>

namespace alignlab {

/// Pseudo-spectral operators on a uniform periodic 1D grid: 2/3 dealiasing plus an exponential
/// filter on the top 10% of the retained modes.
class Spectral1D {
 public:
  Spectral1D(int n, double period);
  ~Spectral1D();
  Spectral1D(const Spectral1D&) = delete;
  Spectral1D& operator=(const Spectral1D&) = delete;

  int size() const { return n_; }
  /// d/dx of the dealiased, filtered interpolant.
  std::vector<double> derivative(std::span<const double> values) const;
  /// Exact spectral derivative without dealiasing or filtering.
  std::vector<double> raw_derivative(std::span<const double> values) const;
  /// Dealiased, filtered projection.
  std::vector<double> smooth(std::span<const double> values) const;
  /// Fraction of the non-mean spectral energy carried by the top third of the retained modes.
  double tail_fraction(std::span<const double> values) const;

 private:
  struct Impl;
  int n_;
  double period_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace alignlab
