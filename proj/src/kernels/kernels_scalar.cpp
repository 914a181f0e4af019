#include "gridlock/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gridlock::kernels {
namespace {

void damped_phasor_scalar(std::complex<double> coef, std::complex<double> pole, double t0, double dt,
                          std::span<double> out) {
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    const double mag = std::exp(pole.real() * t);
    const double arg = pole.imag() * t;
    out[n] += mag * (coef.real() * std::cos(arg) - coef.imag() * std::sin(arg));
  }
}

std::complex<double> correlate_scalar(std::span<const double> x, double w, double p0) {
  double c = 0.0;
  double s = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double arg = w * static_cast<double>(n) + p0;
    c += x[n] * std::cos(arg);
    s += x[n] * std::sin(arg);
  }
  return {c, s};
}

double abs_max_scalar(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

std::ptrdiff_t last_above_scalar(std::span<const double> x, double threshold) {
  for (std::size_t n = x.size(); n-- > 0;) {
    if (std::abs(x[n]) > threshold) return static_cast<std::ptrdiff_t>(n);
  }
  return -1;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", damped_phasor_scalar, correlate_scalar, abs_max_scalar,
                                 last_above_scalar};
  return table;
}

}  // namespace gridlock::kernels
