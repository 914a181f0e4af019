#pragma once
// Sample-by-sample simulation of filter + loop on a synthesized grid signal,
// in double precision or emulated 16-bit fixed point, plus transient and
// steady-state metrics on the resulting traces.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridlock/design.hpp"
#include "gridlock/signal_model.hpp"

namespace gridlock {

enum class Arithmetic { Float64, Fixed16 };
enum class Topology { Hgi, BasicSogi };

struct ArithmeticMode {
  Arithmetic kind = Arithmetic::Float64;
  int frac_bits = 14;                 // signal format for Fixed16, 8..15
  std::size_t trig_table_size = 1024;  // power of two

  void validate() const;
};

struct SimOptions {
  double duration = 0.5;  // s
  double sample_period = 50e-6;
  double nominal_hz = 50.0;
  ArithmeticMode arithmetic;
  Topology topology = Topology::Hgi;
};

struct TraceChannel {
  const char* name;
  const char* unit;
  const std::vector<double>* data;
};

struct SimTrace {
  double sample_period = 0.0;
  std::vector<double> t;
  std::vector<double> v_g;
  std::vector<double> v_alpha;
  std::vector<double> v_beta;
  std::vector<double> v_d;
  std::vector<double> v_q;
  std::vector<double> omega_e;  // rad/s
  std::vector<double> theta_e;  // rad
  std::vector<double> sin_theta;
  std::vector<double> cos_theta;
  long long saturations = 0;  // fixed-point clamps

  std::size_t size() const { return t.size(); }
  std::vector<TraceChannel> channels() const;
  std::vector<double> frequency_hz() const;
};

// Starts from zero filter state, theta_e = 0 and omega_e = nominal. Throws
// Error(Divergence) if any state stops being finite.
SimTrace simulate(const GridSignalSpec& scenario, const PllDesign& design, const SimOptions& opts);

struct MetricsOptions {
  std::optional<double> event_time;  // s; none: settle_time is 0
  double band_hz = 0.5;
  double fundamental_hz = 50.0;  // steady-state input frequency
  int steady_cycles = 10;        // length of the final-value window
};

struct TransientMetrics {
  double settle_time = 0.0;        // s after the event
  bool settled = true;             // false if the band is still violated in the final window
  double peak_freq_excursion = 0.0;  // Hz, after the event
  double final_frequency = 0.0;    // Hz, mean over the final window
  double steady_thd = 0.0;         // percent, sin(theta_e) over the final window
  double freq_ripple_peak = 0.0;   // Hz, max |f_e - final| in the final window
  double fundamental_ripple = 0.0;  // Hz, f_e line at the fundamental, final window
  double window_seconds = 0.0;
};

TransientMetrics transient_metrics(const SimTrace& trace, const MetricsOptions& opts);

struct DriftReport {
  std::string q_format;
  double max_freq_dev_hz = 0.0;     // |f_fixed - f_float| after the warm-up
  double max_unit_vector_dev = 0.0;  // |sin_fixed - sin_float| after the warm-up
  double float_thd = 0.0;
  double fixed_thd = 0.0;
  long long saturations = 0;
};

DriftReport fixed_vs_float_drift(const GridSignalSpec& scenario, const PllDesign& design, SimOptions opts,
                                 double warmup = 0.2);

}  // namespace gridlock
