#pragma once
// High-pass generalized integrator: the filter pair that turns the sensed
// grid voltage into in-phase (alpha) and quadrature (beta) signals with zero
// dc gain on both outputs.
//
//   G_alpha(s) = k w0 s / (s^2 + k w0 s + w0^2)
//   G_beta(s)  = -k s^2 / (s^2 + k w0 s + w0^2)
//
// The basic SOGI baseline shares G_alpha but has a low-pass beta channel,
// k w0^2 / (s^2 + k w0 s + w0^2).

#include <complex>
#include <numbers>

#include "gridlock/op_count.hpp"

namespace gridlock {

inline constexpr double kNominalOmega = 2.0 * std::numbers::pi * 50.0;

struct HgiParams {
  double k = 1.56;
  double omega0 = kNominalOmega;  // rad/s

  void validate() const;
};

struct HgiResponse {
  std::complex<double> alpha;
  std::complex<double> beta;
};

HgiResponse freq_response(const HgiParams& params, double omega);

// Low-pass beta channel of the basic SOGI.
std::complex<double> sogi_beta_response(const HgiParams& params, double omega);

// ---------------------------------------------------------------------------
// Forward-Euler realization. The two states are v_alpha and q, the w0-scaled
// integral of v_alpha.

template <class Coef>
struct HgiCoeffs {
  Coef k{};
  Coef c{};       // w0 * Ts
  Coef half_c{};  // w0 * Ts / 2
};

template <class Sig>
struct HgiStateT {
  Sig alpha{};
  Sig q{};
};

template <class Sig>
struct QuadratureSample {
  Sig alpha{};
  Sig beta{};
};

// 4 multiplications, 6 additions. The last product moves q back half a
// sample, onto the same instant as alpha.
template <class Sig, class Coef>
QuadratureSample<Sig> hgi_update(HgiStateT<Sig>& st, const HgiCoeffs<Coef>& cf, Sig vg) {
  const Sig ke = cf.k * (vg - st.alpha);
  st.alpha = st.alpha + cf.c * (ke - st.q);
  st.q = st.q + cf.c * st.alpha;
  return {st.alpha, st.q - cf.half_c * st.alpha - ke};
}

// 3 multiplications, 4 additions.
template <class Sig, class Coef>
QuadratureSample<Sig> sogi_update(HgiStateT<Sig>& st, const HgiCoeffs<Coef>& cf, Sig vg) {
  const Sig err = vg - st.alpha;
  const Sig drive = cf.k * err - st.q;
  st.alpha = st.alpha + cf.c * drive;
  st.q = st.q + cf.c * st.alpha;
  return {st.alpha, st.q};
}

inline constexpr OpCount kHgiUpdateCost{4, 6};
inline constexpr OpCount kSogiUpdateCost{3, 4};

// Measures the cost by running one update on Counted values.
OpCount measure_hgi_update_cost();
OpCount measure_sogi_update_cost();

// Double-precision discrete filter.
class HgiFilter {
 public:
  // Guard: omega0 * Ts must stay below this for forward Euler.
  static constexpr double kDefaultStabilityLimit = 0.1;

  HgiFilter(const HgiParams& params, double sample_period,
            double stability_limit = kDefaultStabilityLimit);

  QuadratureSample<double> step(double vg) { return hgi_update(state_, coeffs_, vg); }

  const HgiStateT<double>& state() const { return state_; }
  void set_state(const HgiStateT<double>& s) { state_ = s; }
  double sample_period() const { return ts_; }

 private:
  HgiCoeffs<double> coeffs_;
  HgiStateT<double> state_;
  double ts_;
};

HgiFilter discretize(const HgiParams& params, double sample_period,
                     double stability_limit = HgiFilter::kDefaultStabilityLimit);

// ---------------------------------------------------------------------------
// Step-response settling.

struct SettlingTimes {
  double alpha = 0.0;  // s
  double beta = 0.0;   // s
  double hgi = 0.0;    // max(alpha, beta)
};

// Unit-step responses are evaluated in closed form on a 1 us grid and the last
// band exit is refined by bisection. Both responses decay to zero, so the band
// is +-tolerance times the peak magnitude of each response. Throws
// Error(Unsettled) if either response is still outside its band after 1 s.
SettlingTimes settling_times(const HgiParams& params, double tolerance = 0.02);

struct KOptimum {
  double k = 0.0;
  double t_s_hgi = 0.0;
};

// Grid argmin of t_s_hgi(k) over k_min + i*resolution, ties toward smaller k.
KOptimum k_opt_search(double omega0, double k_min, double k_max, double resolution,
                      double tolerance = 0.02);

// Closed-form unit-step responses at time t (for tests and plotting).
double alpha_step_response(const HgiParams& params, double t);
double beta_step_response(const HgiParams& params, double t);

}  // namespace gridlock
