#pragma once
// Embedded synchronous-reference-frame PLL: Park rotation, PI loop filter with
// nominal-frequency feedforward, and the phase integrator.
//
// Sign convention: a locked positive-sequence input is v_alpha = V sin(theta),
// v_beta = -V cos(theta). Then v_d = V sin(theta - theta_e), which the PI
// drives to zero; the loop seen from the phase error is -(kp + ki/s)(1/s).

#include <cmath>
#include <numbers>

#include "gridlock/hgi.hpp"
#include "gridlock/op_count.hpp"

namespace gridlock {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ki is the integral gain produced by the bandwidth mapping below and is used
// as the continuous integral gain of the loop; one sample adds ki*Ts*v_d to
// the integrator.
struct PiParams {
  double kp = 0.0;             // (rad/s)/pu
  double ki = 0.0;             // (rad/s^2)/pu
  double sample_period = 50e-6;  // s

  void validate() const;
};

// kp = w_bw / v_m, ki = kp * Ts * w_bw^2 with w_bw = 2 pi f_bw.
PiParams pi_from_bandwidth(double f_bw, double v_m, double sample_period);

// Settling-time approximation of the embedded loop: 4 / w_bw.
double srf_settling_time(double omega_bw);

struct DqPair {
  double d = 0.0;
  double q = 0.0;
};

DqPair park(double v_alpha, double v_beta, double theta_e);

template <class T>
struct SrfStateT {
  T integrator{};  // rad/s
  T theta{};       // rad, in [0, 2 pi)
  T omega{};       // rad/s, last loop output
};

template <class T>
struct SrfCoeffs {
  T kp{};
  T ki_ts{};   // ki * Ts
  T omega0{};  // feedforward
  T ts{};
  T two_pi{};
};

template <class T>
struct UnitVector {
  T sin{};
  T cos{};
};

// One loop sample given the unit vector of the current theta. Returns v_d.
// Cost: 5 multiplications and at most 6 additions (the last one is the
// wrap subtraction).
template <class T>
T srf_update(SrfStateT<T>& st, const SrfCoeffs<T>& cf, T v_alpha, T v_beta, const UnitVector<T>& uv) {
  const T v_d = v_alpha * uv.cos + v_beta * uv.sin;
  st.omega = cf.omega0 + cf.kp * v_d + st.integrator;
  st.integrator = st.integrator + cf.ki_ts * v_d;
  st.theta = st.theta + st.omega * cf.ts;
  if (st.theta >= cf.two_pi) st.theta = st.theta - cf.two_pi;
  if (st.theta < T(0.0)) st.theta = st.theta + cf.two_pi;
  return v_d;
}

inline constexpr OpCount kSrfUpdateBudget{7, 6};

// Worst-case cost of srf_update (wrap taken).
OpCount measure_srf_update_cost();

// Double-precision loop with direct sin/cos.
class SrfPll {
 public:
  SrfPll(const PiParams& pi, double omega0 = kNominalOmega);

  struct Output {
    double v_d = 0.0;
    double sin_theta = 0.0;
    double cos_theta = 0.0;
    double theta = 0.0;  // angle the unit vector was taken at
  };

  // Uses the current theta for the rotation, then advances it.
  Output step(double v_alpha, double v_beta);

  const SrfStateT<double>& state() const { return state_; }
  void set_state(const SrfStateT<double>& s) { state_ = s; }
  double omega() const { return state_.omega; }

 private:
  SrfCoeffs<double> coeffs_;
  SrfStateT<double> state_;
};

}  // namespace gridlock
