#include "gridlock/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gridlock/error.hpp"

namespace gridlock {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

void GridSignalSpec::validate() const {
  require(std::isfinite(fundamental_frequency) && fundamental_frequency > 0.0,
          "fundamental frequency must be positive");
  require(std::isfinite(fundamental_amplitude) && fundamental_amplitude >= 0.0,
          "fundamental amplitude must be non-negative");
  require(std::isfinite(dc_offset), "dc offset must be finite");
  for (const auto& h : harmonics) {
    require(h.order >= 2, "harmonic order must be >= 2");
    require(std::isfinite(h.amplitude) && h.amplitude >= 0.0, "harmonic amplitude must be non-negative");
  }
  double last = 0.0;
  for (const auto& e : events) {
    require(std::isfinite(e.time) && e.time >= 0.0, "event time must be non-negative");
    require(e.time >= last, "events must be sorted by time");
    if (e.kind == EventKind::FrequencyStep) require(e.value > 0.0, "frequency step must be positive");
    last = e.time;
  }
}

std::vector<HarmonicComponent> harmonic_profile(double input_thd, std::span<const int> orders) {
  if (orders.empty()) throw Error(ErrorCode::InvalidArgument, "no harmonic orders");
  require(input_thd >= 0.0, "input THD must be non-negative");
  double sum_sq = 0.0;
  for (int h : orders) {
    require(h >= 2, "harmonic order must be >= 2");
    sum_sq += 1.0 / (static_cast<double>(h) * h);
  }
  const double scale = input_thd / std::sqrt(sum_sq);
  std::vector<HarmonicComponent> out;
  out.reserve(orders.size());
  for (int h : orders) out.push_back({h, scale / h, 0.0});
  return out;
}

SignalGenerator::SignalGenerator(const GridSignalSpec& spec, double sample_period)
    : spec_(spec), dt_(sample_period) {
  require(sample_period > 0.0, "sample period must be positive");
  spec_.validate();
  freq_ = spec_.fundamental_frequency;
  amplitude_ = spec_.fundamental_amplitude;
  dc_ = spec_.dc_offset;
  theta_ = spec_.fundamental_phase;
}

void SignalGenerator::apply_events_up_to(double t) {
  const double slack = 1e-9 * dt_;
  while (next_event_ < spec_.events.size() && spec_.events[next_event_].time <= t + slack) {
    const TimedEvent& e = spec_.events[next_event_++];
    const double te = std::min(e.time, t);
    theta_ += kTwoPi * freq_ * (te - theta_t_);
    theta_t_ = te;
    switch (e.kind) {
      case EventKind::PhaseJump: theta_ += e.value; break;
      case EventKind::FrequencyStep: freq_ = e.value; break;
      case EventKind::AmplitudeStep: amplitude_ = e.value; break;
      case EventKind::DcStep: dc_ = e.value; break;
    }
  }
  theta_ += kTwoPi * freq_ * (t - theta_t_);
  theta_t_ = t;
  if (theta_ >= kTwoPi || theta_ < 0.0) theta_ -= kTwoPi * std::floor(theta_ / kTwoPi);
}

double SignalGenerator::next() {
  apply_events_up_to(time());
  double v = amplitude_ * std::sin(theta_) + dc_;
  for (const auto& h : spec_.harmonics) v += h.amplitude * std::sin(h.order * theta_ + h.phase);
  ++index_;
  return v;
}

std::vector<double> synthesize(const GridSignalSpec& spec, double sample_period, double duration) {
  require(sample_period > 0.0, "sample period must be positive");
  require(duration > 0.0, "duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration / sample_period));
  SignalGenerator gen(spec, sample_period);
  std::vector<double> out(n);
  for (auto& v : out) v = gen.next();
  return out;
}

}  // namespace gridlock
