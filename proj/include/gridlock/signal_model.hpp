#pragma once
// Grid-voltage scenarios in per-unit of the nominal peak, and their sampled
// synthesis.

#include <span>
#include <vector>

namespace gridlock {

struct HarmonicComponent {
  int order = 3;           // >= 2
  double amplitude = 0.0;  // pu of the fundamental peak
  double phase = 0.0;      // rad
};

enum class EventKind { PhaseJump, FrequencyStep, AmplitudeStep, DcStep };

// PhaseJump adds `value` radians to the running phase. The other kinds set a
// new level: frequency in Hz, fundamental amplitude in pu, dc offset in pu.
struct TimedEvent {
  double time = 0.0;  // s
  EventKind kind = EventKind::PhaseJump;
  double value = 0.0;
};

struct GridSignalSpec {
  double fundamental_amplitude = 1.0;
  double fundamental_frequency = 50.0;  // Hz
  double fundamental_phase = 0.0;       // rad
  std::vector<HarmonicComponent> harmonics;
  double dc_offset = 0.0;
  std::vector<TimedEvent> events;

  // Throws Error(InvalidArgument) on a broken invariant.
  void validate() const;
};

inline const std::vector<int> kDefaultHarmonicOrders{3, 5, 7, 9};

// Harmonic amplitudes inversely proportional to order, scaled so their RSS
// equals input_thd (fraction of a 1 pu fundamental). Phases are zero.
std::vector<HarmonicComponent> harmonic_profile(double input_thd,
                                                std::span<const int> orders = kDefaultHarmonicOrders);

// Sample n is taken at t = n * sample_period; round(duration / sample_period)
// samples are produced. The fundamental phase integrates the piecewise
// constant frequency exactly, so frequency steps never break continuity.
std::vector<double> synthesize(const GridSignalSpec& spec, double sample_period, double duration);

// Streaming form of synthesize(), used by the simulator.
class SignalGenerator {
 public:
  SignalGenerator(const GridSignalSpec& spec, double sample_period);

  // Value at the current sample, then advances one sample.
  double next();

  double time() const { return static_cast<double>(index_) * dt_; }
  double frequency() const { return freq_; }

 private:
  void apply_events_up_to(double t);

  GridSignalSpec spec_;
  double dt_;
  long long index_ = 0;
  std::size_t next_event_ = 0;
  double theta_ = 0.0;     // running phase at sample index_
  double theta_t_ = 0.0;   // time theta_ refers to
  double freq_ = 0.0;
  double amplitude_ = 0.0;
  double dc_ = 0.0;
};

}  // namespace gridlock
