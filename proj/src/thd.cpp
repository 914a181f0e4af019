#include "gridlock/thd.hpp"

#include <cmath>
#include <numbers>

#include "gridlock/error.hpp"
#include "gridlock/kernels.hpp"

namespace gridlock {
namespace {

using cplx = std::complex<double>;
constexpr cplx kJ{0.0, 1.0};

// Folds a negative amplitude into the phase.
void normalize(double& a, double& phi) {
  if (a < 0.0) {
    a = -a;
    phi += std::numbers::pi;
  }
  phi = std::remainder(phi, 2.0 * std::numbers::pi);
}

}  // namespace

LoopGain loop_gain_at(const PiParams& pi, double omega_eval) {
  if (!(omega_eval > 0.0)) throw Error(ErrorCode::InvalidArgument, "evaluation frequency must be positive");
  const cplx s(0.0, omega_eval);
  const cplx g = -(pi.kp + pi.ki / s) / s;
  return {std::abs(g), std::arg(g)};
}

FreqDevRipple freq_dev_ripple(const HgiParams& hgi, const PiParams& pi, double omega_in,
                              double fundamental_amplitude, double fundamental_phase) {
  if (!(omega_in > 0.5 * hgi.omega0 && omega_in < 1.5 * hgi.omega0)) {
    throw Error(ErrorCode::InvalidArgument, "input frequency must lie within (0.5, 1.5) x nominal");
  }
  const HgiResponse g = freq_response(hgi, omega_in);
  const double v1 = fundamental_amplitude * std::abs(g.alpha);
  const double p1 = std::arg(g.alpha) + fundamental_phase;
  const double v2 = fundamental_amplitude * std::abs(g.beta);
  const double p2 = std::arg(g.beta) + fundamental_phase;
  if (fundamental_amplitude != 0.0 && std::abs(v1 - v2) <= 1e-9 * std::abs(fundamental_amplitude) &&
      std::abs(std::remainder(p1 - p2 - 0.5 * std::numbers::pi, 2.0 * std::numbers::pi)) <= 1e-9) {
    // Balanced pair: no negative sequence, no ripple.
    FreqDevRipple zero;
    zero.third.output_order = 3;
    zero.first.output_order = 1;
    return zero;
  }
  const LoopGain lg = loop_gain_at(pi, 2.0 * omega_in);
  const double m = lg.m;
  const double x = lg.x;

  const double nu_num = 0.5 * v1 * std::cos(p1 + x) + 0.5 * v2 * std::sin(p2 + x);
  const double nu_den = 0.5 * v1 * std::sin(p1 + x) - 0.5 * v2 * std::cos(p2 + x);
  const double alpha = std::cos(x) + (0.5 * v1 * std::cos(p1) - 0.5 * v2 * std::sin(p2)) * m;
  const double beta = std::sin(x);

  // arctan[(alpha + beta nu) / (alpha nu - beta)], with nu = nu_num / nu_den
  // cleared from both arguments so nu_den = 0 is not a pole.
  double num;
  double den;
  if (std::abs(nu_den) > 1e-300) {
    const double nu = nu_num / nu_den;
    num = alpha + beta * nu;
    den = alpha * nu - beta;
  } else {
    num = beta * nu_num;
    den = alpha * nu_num;
  }
  if (std::abs(num) < 1e-12 && std::abs(den) < 1e-12) {
    throw Error(ErrorCode::Indeterminate, "ripple phase indeterminate");
  }
  double phi = std::atan2(num, den) - x;

  const double gain_term = -std::cos(p1) * 0.5 * v1 + std::sin(p2) * 0.5 * v2;
  double a = m * nu_num / (std::cos(phi) - m * std::cos(phi + x) * gain_term);
  normalize(a, phi);

  FreqDevRipple r;
  r.a = a;
  r.phi = phi;
  r.u3 = 0.5 * a;
  r.third = {r.u3, phi, 3};
  r.first = {r.u3, phi, 1};
  return r;
}

SequenceComponents sequence_decompose(const Phasor& v_alpha, const Phasor& v_beta) {
  if (v_alpha.order != v_beta.order) {
    throw Error(ErrorCode::InvalidArgument, "alpha and beta phasors must share a harmonic order");
  }
  const cplx a = v_alpha.value();
  const cplx b = v_beta.value();
  const cplx ap = 0.5 * (a + kJ * b);
  const cplx an = 0.5 * (a - kJ * b);
  const int h = v_alpha.order;
  return {Phasor::from(ap, h, Sequence::Positive), Phasor::from(-kJ * ap, h, Sequence::Positive),
          Phasor::from(an, h, Sequence::Negative), Phasor::from(kJ * an, h, Sequence::Negative)};
}

std::vector<RippleTerm> harmonic_ripple(int h, Sequence seq, double v_h, double gamma, double v1_plus,
                                        double delta, const PiParams& pi, double omega) {
  if (h < 2) throw Error(ErrorCode::InvalidArgument, "harmonic order must be >= 2");
  if (v_h < 0.0) throw Error(ErrorCode::InvalidArgument, "harmonic amplitude must be non-negative");
  if (v1_plus == 0.0) throw Error(ErrorCode::InvalidArgument, "no fundamental reference");
  if (v_h == 0.0) return {};

  const int beat = seq == Sequence::Positive ? h - 1 : h + 1;
  const LoopGain lg = loop_gain_at(pi, beat * omega);
  const double m = lg.m;
  const double x = lg.x;
  const double fb = m * v1_plus * std::cos(delta);
  const double alpha_h = 1.0 + fb * std::cos(x);
  const double beta_h = fb * std::sin(x);

  // arctan[(alpha - beta cot(x+g)) / (beta + alpha cot(x+g))] with both
  // arguments multiplied through by sin(x+g), which removes the cot poles.
  const double sg = std::sin(x + gamma);
  const double cg = std::cos(x + gamma);
  double phi = std::atan2(alpha_h * sg - beta_h * cg, beta_h * sg + alpha_h * cg);
  double a;
  if (std::abs(cg) > 1e-9) {
    a = 0.5 * v_h * m * cg / (std::cos(phi) + fb * std::cos(phi + x));
  } else {
    // cos(x+g) also factors out of the denominator; this is the limit.
    a = 0.5 * v_h * m / std::hypot(alpha_h, beta_h);
  }
  normalize(a, phi);

  if (seq == Sequence::Positive) return {{a, phi, h - 2}, {a, phi, h}};
  return {{a, phi, h}, {a, phi, h + 2}};
}

ThdBreakdown unit_vector_thd_breakdown(const GridSignalSpec& spec, const HgiParams& hgi, const PiParams& pi) {
  spec.validate();
  if (!spec.events.empty()) {
    throw Error(ErrorCode::InvalidArgument, "steady-state THD needs a scenario without events");
  }
  const double omega = kTwoPi * spec.fundamental_frequency;
  const double amp = spec.fundamental_amplitude;
  const cplx fund_in = std::polar(amp, spec.fundamental_phase);

  const HgiResponse g1 = freq_response(hgi, omega);
  const SequenceComponents fund =
      sequence_decompose(Phasor::from(g1.alpha * fund_in, 1), Phasor::from(g1.beta * fund_in, 1));

  ThdBreakdown out;
  out.v1_plus = fund.alpha_pos.amplitude;
  out.delta = fund.alpha_pos.phase;
  auto add = [&](const RippleTerm& t) { out.orders[t.output_order] += std::polar(t.a, t.phi); };

  if (std::abs(omega - hgi.omega0) > 1e-12 * hgi.omega0 && amp > 0.0) {
    const FreqDevRipple r = freq_dev_ripple(hgi, pi, omega, amp, spec.fundamental_phase);
    add(r.third);
    add(r.first);
  }

  for (const auto& hc : spec.harmonics) {
    if (hc.amplitude == 0.0) continue;
    const cplx in = std::polar(hc.amplitude, hc.order * spec.fundamental_phase + hc.phase);
    const HgiResponse gh = freq_response(hgi, hc.order * omega);
    const SequenceComponents sc = sequence_decompose(Phasor::from(gh.alpha * in, hc.order),
                                                     Phasor::from(gh.beta * in, hc.order));
    for (const auto& t : harmonic_ripple(hc.order, Sequence::Positive, sc.alpha_pos.amplitude,
                                         sc.alpha_pos.phase, out.v1_plus, out.delta, pi, omega)) {
      add(t);
    }
    for (const auto& t : harmonic_ripple(hc.order, Sequence::Negative, sc.alpha_neg.amplitude,
                                         sc.alpha_neg.phase, out.v1_plus, out.delta, pi, omega)) {
      add(t);
    }
  }

  double sum_sq = 0.0;
  for (const auto& [order, z] : out.orders) {
    if (order >= 2) sum_sq += std::norm(z);
  }
  if (auto it = out.orders.find(1); it != out.orders.end()) out.fundamental_ripple = std::abs(it->second);
  out.thd_percent = 100.0 * std::sqrt(sum_sq);
  return out;
}

double total_unit_vector_thd(const GridSignalSpec& spec, const HgiParams& hgi, const PiParams& pi) {
  return unit_vector_thd_breakdown(spec, hgi, pi).thd_percent;
}

std::complex<double> spectral_line(std::span<const double> trace, double freq_hz, double sample_period) {
  if (trace.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  const cplx cs = kernels::active().correlate(trace, kTwoPi * freq_hz * sample_period, 0.0);
  const double scale = 2.0 / static_cast<double>(trace.size());
  return {scale * cs.imag(), scale * cs.real()};
}

double measured_thd(std::span<const double> trace, double fundamental_hz, double sample_period, int max_order) {
  if (!(fundamental_hz > 0.0) || !(sample_period > 0.0) || max_order < 2) {
    throw Error(ErrorCode::InvalidArgument, "invalid THD measurement parameters");
  }
  const double cycles = static_cast<double>(trace.size()) * fundamental_hz * sample_period;
  if (std::abs(cycles - std::round(cycles)) > 1e-6) throw Error(ErrorCode::Leakage, "leakage window");
  if (std::round(cycles) < 5.0) {
    throw Error(ErrorCode::InvalidArgument, "THD window must span at least 5 fundamental cycles");
  }
  const double nyquist = 0.5 / sample_period;
  const double fund = std::abs(spectral_line(trace, fundamental_hz, sample_period));
  if (fund == 0.0) throw Error(ErrorCode::InvalidArgument, "no fundamental in trace");
  double sum_sq = 0.0;
  for (int n = 2; n <= max_order && n * fundamental_hz < nyquist; ++n) {
    sum_sq += std::norm(spectral_line(trace, n * fundamental_hz, sample_period));
  }
  return 100.0 * std::sqrt(sum_sq) / fund;
}

std::size_t integer_cycle_window(double fundamental_hz, double sample_period, int min_cycles,
                                 std::size_t max_samples) {
  const double per_cycle = 1.0 / (fundamental_hz * sample_period);
  for (int m = std::max(min_cycles, 1);; ++m) {
    const double n = m * per_cycle;
    if (n > static_cast<double>(max_samples) + 0.5) return 0;
    if (std::abs(n - std::round(n)) < 1e-6) return static_cast<std::size_t>(std::llround(n));
  }
}

}  // namespace gridlock
