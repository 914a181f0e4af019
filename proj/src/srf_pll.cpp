#include "gridlock/srf_pll.hpp"

#include "gridlock/error.hpp"

namespace gridlock {

void PiParams::validate() const {
  if (!(kp > 0.0) || !(ki > 0.0) || !(sample_period > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "PI parameters require kp > 0, ki > 0, Ts > 0");
  }
}

PiParams pi_from_bandwidth(double f_bw, double v_m, double sample_period) {
  if (!(f_bw > 0.0) || !(v_m > 0.0) || !(sample_period > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth, v_m and Ts must be positive");
  }
  const double w_bw = kTwoPi * f_bw;
  const double kp = w_bw / v_m;
  return {kp, kp * sample_period * w_bw * w_bw, sample_period};
}

double srf_settling_time(double omega_bw) {
  if (!(omega_bw > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  return 4.0 / omega_bw;
}

DqPair park(double v_alpha, double v_beta, double theta_e) {
  const double s = std::sin(theta_e);
  const double c = std::cos(theta_e);
  return {v_alpha * c + v_beta * s, -v_alpha * s + v_beta * c};
}

OpCount measure_srf_update_cost() {
  // Start just below 2 pi so the wrap subtraction fires.
  SrfStateT<Counted> st{0.0, kTwoPi - 1e-6, 0.0};
  const SrfCoeffs<Counted> cf{345.0, 0.1, kNominalOmega, 50e-6, kTwoPi};
  const UnitVector<Counted> uv{0.0, 1.0};
  Counted::reset();
  (void)srf_update(st, cf, Counted(0.2), Counted(-0.9), uv);
  return Counted::tally();
}

SrfPll::SrfPll(const PiParams& pi, double omega0) {
  pi.validate();
  coeffs_ = {pi.kp, pi.ki * pi.sample_period, omega0, pi.sample_period, kTwoPi};
  state_.omega = omega0;
}

SrfPll::Output SrfPll::step(double v_alpha, double v_beta) {
  const double theta = state_.theta;
  const UnitVector<double> uv{std::sin(theta), std::cos(theta)};
  const double v_d = srf_update(state_, coeffs_, v_alpha, v_beta, uv);
  return {v_d, uv.sin, uv.cos, theta};
}

}  // namespace gridlock
