#include "gridlock/hgi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gridlock/error.hpp"
#include "gridlock/kernels.hpp"

namespace gridlock {
namespace {

using cplx = std::complex<double>;

constexpr double kScanStep = 1e-6;      // s
constexpr double kHorizon = 1.0;        // s
constexpr std::size_t kChunk = 4096;    // samples per scan chunk

std::complex<double> denominator(const HgiParams& p, cplx s) {
  return s * s + p.k * p.omega0 * s + p.omega0 * p.omega0;
}

// y(t) = sum_i Re(coef_i exp(pole_i t)); repeated roots use the explicit form.
struct ModalResponse {
  int terms = 0;
  cplx coef[2];
  cplx pole[2];
  // Critically damped: y = (lin * t + cst) * exp(pole_c * t).
  bool critical = false;
  double pole_c = 0.0;
  double lin = 0.0;
  double cst = 0.0;

  double eval(double t) const {
    if (critical) return (lin * t + cst) * std::exp(pole_c * t);
    double y = 0.0;
    for (int i = 0; i < terms; ++i) y += (coef[i] * std::exp(pole[i] * t)).real();
    return y;
  }

  // Decreasing upper bound on |y(t)|.
  double envelope(double t) const {
    if (critical) return (std::abs(lin) * t + std::abs(cst)) * std::exp(pole_c * t);
    double b = 0.0;
    for (int i = 0; i < terms; ++i) b += std::abs(coef[i]) * std::exp(pole[i].real() * t);
    return b;
  }

  void fill(double t0, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (critical) {
      for (std::size_t n = 0; n < out.size(); ++n) out[n] = eval(t0 + static_cast<double>(n) * kScanStep);
      return;
    }
    const auto& kern = kernels::active();
    for (int i = 0; i < terms; ++i) kern.damped_phasor(coef[i], pole[i], t0, kScanStep, out);
  }
};

// which = 0: alpha step response; which = 1: beta step response.
ModalResponse modal_step_response(const HgiParams& p, int which) {
  const double w0 = p.omega0;
  const double sigma = 0.5 * p.k * w0;
  const double disc = sigma * sigma - w0 * w0;
  ModalResponse r;
  if (std::abs(disc) < 1e-12 * w0 * w0) {
    r.critical = true;
    r.pole_c = -sigma;
    if (which == 0) {
      r.lin = p.k * w0;  // k w0 * t e^{pt}
      r.cst = 0.0;
    } else {
      r.lin = -p.k * (-sigma);  // -k (1 + p t) e^{pt}
      r.cst = -p.k;
    }
    return r;
  }
  const cplx root = std::sqrt(cplx(disc, 0.0));
  const cplx p1 = -sigma + root;
  const cplx p2 = -sigma - root;
  cplx c1;
  cplx c2;
  if (which == 0) {
    c1 = p.k * w0 / (p1 - p2);
    c2 = -c1;
  } else {
    c1 = -p.k * p1 / (p1 - p2);
    c2 = p.k * p2 / (p1 - p2);
  }
  if (disc < 0.0) {
    // Conjugate pair: the two modes sum to twice the real part of one.
    r.terms = 1;
    r.coef[0] = 2.0 * c1;
    r.pole[0] = p1;
  } else {
    r.terms = 2;
    r.coef[0] = c1;
    r.pole[0] = p1;
    r.coef[1] = c2;
    r.pole[1] = p2;
  }
  return r;
}

double band_exit_time(const ModalResponse& r, double tolerance) {
  const auto& kern = kernels::active();
  std::vector<double> samples;
  double peak = 0.0;
  std::size_t n = 0;
  for (;;) {
    const double t_end = static_cast<double>(n) * kScanStep;
    if (n > 0 && r.envelope(t_end) < tolerance * peak) break;
    if (t_end > kHorizon) throw Error(ErrorCode::Unsettled, "unstable or unsettled");
    samples.resize(n + kChunk);
    std::span<double> chunk(samples.data() + n, kChunk);
    r.fill(static_cast<double>(n) * kScanStep, chunk);
    peak = std::max(peak, kern.abs_max(chunk));
    n += kChunk;
  }
  const double threshold = tolerance * peak;
  const std::ptrdiff_t last = kern.last_above(samples, threshold);
  if (last < 0) return 0.0;
  double lo = static_cast<double>(last) * kScanStep;
  double hi = lo + kScanStep;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(r.eval(mid)) > threshold) lo = mid; else hi = mid;
  }
  return hi;
}

}  // namespace

void HgiParams::validate() const {
  if (!(k > 0.0) || !(omega0 > 0.0) || !std::isfinite(k) || !std::isfinite(omega0)) {
    throw Error(ErrorCode::InvalidArgument, "HGI parameters require k > 0 and omega0 > 0");
  }
}

HgiResponse freq_response(const HgiParams& params, double omega) {
  if (omega < 0.0) throw Error(ErrorCode::InvalidArgument, "frequency must be non-negative");
  const cplx s(0.0, omega);
  const cplx d = denominator(params, s);
  return {params.k * params.omega0 * s / d, -params.k * s * s / d};
}

std::complex<double> sogi_beta_response(const HgiParams& params, double omega) {
  const cplx s(0.0, omega);
  return params.k * params.omega0 * params.omega0 / denominator(params, s);
}

OpCount measure_hgi_update_cost() {
  HgiStateT<Counted> st{0.3, -0.1};
  const HgiCoeffs<Counted> cf{1.56, 0.0157, 0.00785};
  Counted::reset();
  (void)hgi_update(st, cf, Counted(0.5));
  return Counted::tally();
}

OpCount measure_sogi_update_cost() {
  HgiStateT<Counted> st{0.3, -0.1};
  const HgiCoeffs<Counted> cf{1.56, 0.0157, 0.00785};
  Counted::reset();
  (void)sogi_update(st, cf, Counted(0.5));
  return Counted::tally();
}

HgiFilter::HgiFilter(const HgiParams& params, double sample_period, double stability_limit)
    : ts_(sample_period) {
  params.validate();
  if (!(sample_period > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample period must be positive");
  if (!(params.omega0 * sample_period < stability_limit)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate too low for Euler stability");
  }
  coeffs_ = {params.k, params.omega0 * sample_period, 0.5 * params.omega0 * sample_period};
}

HgiFilter discretize(const HgiParams& params, double sample_period, double stability_limit) {
  return HgiFilter(params, sample_period, stability_limit);
}

double alpha_step_response(const HgiParams& params, double t) {
  return modal_step_response(params, 0).eval(t);
}

double beta_step_response(const HgiParams& params, double t) {
  return modal_step_response(params, 1).eval(t);
}

SettlingTimes settling_times(const HgiParams& params, double tolerance) {
  params.validate();
  if (!(tolerance > 0.0 && tolerance <= 0.2)) {
    throw Error(ErrorCode::InvalidArgument, "settling tolerance must be in (0, 0.2]");
  }
  SettlingTimes st;
  st.alpha = band_exit_time(modal_step_response(params, 0), tolerance);
  st.beta = band_exit_time(modal_step_response(params, 1), tolerance);
  st.hgi = std::max(st.alpha, st.beta);
  return st;
}

KOptimum k_opt_search(double omega0, double k_min, double k_max, double resolution, double tolerance) {
  if (!(k_min > 0.0 && k_min <= k_max) || !(resolution > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "k range must satisfy 0 < k_min <= k_max, resolution > 0");
  }
  const auto count = static_cast<long>(std::floor((k_max - k_min) / resolution + 1e-9)) + 1;
  KOptimum best{0.0, std::numeric_limits<double>::infinity()};
  for (long i = 0; i < count; ++i) {
    const double k = k_min + static_cast<double>(i) * resolution;
    const double t = settling_times({k, omega0}, tolerance).hgi;
    if (t < best.t_s_hgi) best = {k, t};
  }
  return best;
}

}  // namespace gridlock
