#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "alignlab/torus.hpp"

namespace alignlab {

/// Radial communication kernel phi(r) on the torus, evaluated through the minimal-image
/// distance. Immutable after construction.
class CommunicationKernel {
 public:
  using Profile = std::function<double(double)>;

  CommunicationKernel(Profile profile, std::string family, int smoothness_order, double c0,
                      bool fat_tail);

  /// phi(r) = (1 + r^2)^(-beta); c0 is the profile at the half-diameter of `geom`.
  static CommunicationKernel inverse_power(double beta, const TorusGeometry& geom);
  /// phi == c.
  static CommunicationKernel constant(double c);

  double operator()(double r) const { return profile_(r); }

  const std::string& family() const { return family_; }
  int smoothness_order() const { return smoothness_order_; }
  /// Lower bound of the profile on the torus (0 if none is known).
  double c0() const { return c0_; }
  bool is_fat_tail() const { return fat_tail_; }

  /// Samples the profile on [0, half-diameter] and checks nonnegativity, monotonicity and the
  /// c0 lower bound. Throws InvalidArgument on violation.
  void validate(const TorusGeometry& geom, int samples = 512) const;

 private:
  Profile profile_;
  std::string family_;
  int smoothness_order_;
  double c0_;
  bool fat_tail_;
};

/// phi(|a - b|) with the minimal-image distance.
double kernel_eval(const CommunicationKernel& k, const Vec& a, const Vec& b,
                   const TorusGeometry& geom);

/// Periodic self-convolution phi = psi * psi on T^1, tabulated on `resolution` points and
/// reconstructed between nodes by trigonometric interpolation (exact for band-limited psi*psi).
/// Throws InvalidGrid when resolution < 4, InvalidArgument when psi is not bounded below by a
/// positive constant or the torus is not one-dimensional.
CommunicationKernel bochner_square(const CommunicationKernel& psi, const TorusGeometry& geom,
                                   int resolution);

/// Scaled smooth bump Psi_delta(x) = delta^{-n} Psi(x / delta), Psi(y) = C exp(-1/(1-|y|^2))
/// on the unit ball with C normalizing the integral to one.
class Mollifier {
 public:
  Mollifier(double delta, int dim);

  double delta() const { return delta_; }
  int dim() const { return dim_; }
  /// Support radius in physical units.
  double support_radius() const { return delta_; }

  /// Value at a displacement already reduced to the minimal image.
  double at_displacement(const Vec& d) const;

 private:
  double delta_;
  int dim_;
  double scale_;  // C / delta^n
};

double mollifier_eval(const Mollifier& m, const Vec& x, const TorusGeometry& geom);

}  // namespace alignlab
