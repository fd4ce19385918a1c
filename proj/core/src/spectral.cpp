#include "alignlab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "alignlab/error.hpp"

namespace alignlab {

namespace {
// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Spectral1D::Impl {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> filter;  // per mode, zero beyond the 2/3 cutoff

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  std::vector<std::complex<double>> fft(std::span<const double> v, int n) const {
    std::vector<double> in(v.begin(), v.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_execute_dft_r2c(forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  std::vector<double> ifft(std::vector<std::complex<double>> c, int n) const {
    std::vector<double> out(n);
    fftw_execute_dft_c2r(backward, reinterpret_cast<fftw_complex*>(c.data()), out.data());
    for (double& x : out) x /= n;
    return out;
  }
};

Spectral1D::Spectral1D(int n, double period) : n_(n), period_(period), impl_(new Impl) {
  if (n < 8 || n % 2) throw InvalidGrid("spectral grid needs an even size of at least 8");
  if (!(period > 0.0)) throw InvalidGrid("spectral grid period must be positive");
  {
    std::lock_guard lock(planner_mutex());
    std::vector<double> r(n);
    std::vector<std::complex<double>> c(n / 2 + 1);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    impl_->forward = fftw_plan_dft_r2c_1d(n, r.data(), cp, FFTW_ESTIMATE | FFTW_UNALIGNED);
    impl_->backward =
        fftw_plan_dft_c2r_1d(n, cp, r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  }
  if (!impl_->forward || !impl_->backward) throw Error("FFTW planning failed");
  const double kc = n / 3.0;
  impl_->filter.assign(n / 2 + 1, 0.0);
  for (int k = 0; k <= n / 2; ++k) {
    if (k > kc) continue;
    const double eta = k / kc;
    impl_->filter[k] = eta <= 0.9 ? 1.0 : std::exp(-36.0 * std::pow((eta - 0.9) / 0.1, 4));
  }
}

Spectral1D::~Spectral1D() = default;

std::vector<double> Spectral1D::derivative(std::span<const double> values) const {
  auto c = impl_->fft(values, n_);
  const double base = 2.0 * std::numbers::pi / period_;
  for (int k = 0; k <= n_ / 2; ++k) c[k] *= std::complex<double>(0.0, base * k) * impl_->filter[k];
  return impl_->ifft(std::move(c), n_);
}

std::vector<double> Spectral1D::raw_derivative(std::span<const double> values) const {
  auto c = impl_->fft(values, n_);
  const double base = 2.0 * std::numbers::pi / period_;
  for (int k = 0; k <= n_ / 2; ++k) c[k] *= std::complex<double>(0.0, base * k);
  c[n_ / 2] = 0.0;  // the Nyquist derivative is not representable as a real field
  return impl_->ifft(std::move(c), n_);
}

std::vector<double> Spectral1D::smooth(std::span<const double> values) const {
  auto c = impl_->fft(values, n_);
  for (int k = 0; k <= n_ / 2; ++k) c[k] *= impl_->filter[k];
  return impl_->ifft(std::move(c), n_);
}

double Spectral1D::tail_fraction(std::span<const double> values) const {
  const auto c = impl_->fft(values, n_);
  const double kc = n_ / 3.0;
  double total = 0.0, tail = 0.0;
  for (int k = 1; k <= n_ / 2; ++k) {
    const double e = std::norm(c[k]);
    total += e;
    if (k > 2.0 * kc / 3.0) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace alignlab
