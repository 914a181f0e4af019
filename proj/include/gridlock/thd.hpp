#pragma once
// Unit-vector distortion: closed-form prediction of the ripple the embedded
// loop imposes on theta_e (frequency deviation and input harmonics), and a
// DFT measurement of the same quantity on simulated traces.
//
// Phasors are sine-referenced: amplitude A at phase p stands for A sin(h w t + p).

#include <complex>
#include <map>
#include <span>
#include <vector>

#include "gridlock/hgi.hpp"
#include "gridlock/signal_model.hpp"
#include "gridlock/srf_pll.hpp"

namespace gridlock {

enum class Sequence { Positive, Negative };

struct Phasor {
  double amplitude = 0.0;
  double phase = 0.0;
  int order = 1;
  Sequence sequence = Sequence::Positive;

  std::complex<double> value() const { return std::polar(amplitude, phase); }
  static Phasor from(std::complex<double> z, int order, Sequence seq = Sequence::Positive) {
    return {std::abs(z), std::arg(z), order, seq};
  }
};

// Unit-vector harmonic a sin(output_order w t + phi).
struct RippleTerm {
  double a = 0.0;
  double phi = 0.0;
  int output_order = 0;
};

struct LoopGain {
  double m = 0.0;
  double x = 0.0;  // rad
};

// m, x of -(kp + ki/s)(1/s) at s = j omega_eval.
LoopGain loop_gain_at(const PiParams& pi, double omega_eval);

struct FreqDevRipple {
  double a = 0.0;    // amplitude of the 2w ripple on theta_e, rad
  double phi = 0.0;  // its phase
  double u3 = 0.0;   // third-harmonic amplitude of the unit vector, a/2
  RippleTerm third;  // {u3, phi, 3}
  RippleTerm first;  // {u3, phi, 1}, the companion term on the fundamental
};

// Ripple from the alpha/beta amplitude imbalance the filter pair produces at
// an off-nominal fundamental A sin(w t + p).
FreqDevRipple freq_dev_ripple(const HgiParams& hgi, const PiParams& pi, double omega_in,
                              double fundamental_amplitude = 1.0, double fundamental_phase = 0.0);

struct SequenceComponents {
  Phasor alpha_pos;
  Phasor beta_pos;
  Phasor alpha_neg;
  Phasor beta_neg;
};

SequenceComponents sequence_decompose(const Phasor& v_alpha, const Phasor& v_beta);

// Unit-vector terms created by one sequence component of order h. Positive
// sequence yields orders h-2 and h; negative sequence yields h and h+2.
// omega is the fundamental frequency of the input (rad/s).
std::vector<RippleTerm> harmonic_ripple(int h, Sequence seq, double v_h, double gamma,
                                        double v1_plus, double delta, const PiParams& pi,
                                        double omega);

struct ThdBreakdown {
  // Phasor sum per unit-vector order (sine-referenced).
  std::map<int, std::complex<double>> orders;
  double thd_percent = 0.0;       // orders >= 2 relative to a unit fundamental
  double fundamental_ripple = 0.0;  // |order 1 sum|, reported, not in THD
  double v1_plus = 0.0;
  double delta = 0.0;
};

// Steady-state analytical unit-vector THD for an event-free scenario.
ThdBreakdown unit_vector_thd_breakdown(const GridSignalSpec& spec, const HgiParams& hgi,
                                       const PiParams& pi);
double total_unit_vector_thd(const GridSignalSpec& spec, const HgiParams& hgi, const PiParams& pi);

// DFT THD over the whole trace, which must hold an integer number (>= 5) of
// fundamental cycles. Orders 2..max_order enter the numerator.
double measured_thd(std::span<const double> trace, double fundamental_hz, double sample_period,
                    int max_order = 50);

// Complex amplitude (sine-referenced) of the component at freq_hz.
std::complex<double> spectral_line(std::span<const double> trace, double freq_hz, double sample_period);

// Length of the shortest window holding an integer number of fundamental
// cycles (at least min_cycles) with an integer sample count; 0 when none fits
// in max_samples.
std::size_t integer_cycle_window(double fundamental_hz, double sample_period, int min_cycles,
                                 std::size_t max_samples);

}  // namespace gridlock
