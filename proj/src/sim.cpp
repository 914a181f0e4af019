#include "gridlock/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "gridlock/error.hpp"
#include "gridlock/fixed16.hpp"
#include "gridlock/hgi.hpp"
#include "gridlock/srf_pll.hpp"
#include "gridlock/thd.hpp"

namespace gridlock {
namespace {

void reserve_all(SimTrace& tr, std::size_t n) {
  for (auto* v : {&tr.t, &tr.v_g, &tr.v_alpha, &tr.v_beta, &tr.v_d, &tr.v_q, &tr.omega_e, &tr.theta_e,
                  &tr.sin_theta, &tr.cos_theta}) {
    v->reserve(n);
  }
}

void push(SimTrace& tr, double t, double vg, double a, double b, double s, double c, double th, double w) {
  tr.t.push_back(t);
  tr.v_g.push_back(vg);
  tr.v_alpha.push_back(a);
  tr.v_beta.push_back(b);
  tr.v_d.push_back(a * c + b * s);
  tr.v_q.push_back(-a * s + b * c);
  tr.omega_e.push_back(w);
  tr.theta_e.push_back(th);
  tr.sin_theta.push_back(s);
  tr.cos_theta.push_back(c);
}

void run_float(SimTrace& tr, SignalGenerator& gen, const PllDesign& d, const SimOptions& o, std::size_t n) {
  const double omega0 = kTwoPi * o.nominal_hz;
  const HgiCoeffs<double> cf{d.k, omega0 * o.sample_period, 0.5 * omega0 * o.sample_period};
  HgiStateT<double> st;
  PiParams pi = d.pi;
  pi.sample_period = o.sample_period;
  SrfPll pll(pi, omega0);

  for (std::size_t i = 0; i < n; ++i) {
    const double t = gen.time();
    const double vg = gen.next();
    const QuadratureSample<double> q =
        o.topology == Topology::Hgi ? hgi_update(st, cf, vg) : sogi_update(st, cf, vg);
    const SrfPll::Output out = pll.step(q.alpha, q.beta);
    const double w = pll.omega();
    // Beyond Nyquist the phase integrator aliases; treat it like a non-finite state.
    if (!std::isfinite(q.alpha) || !std::isfinite(q.beta) || !(std::abs(w) * o.sample_period < std::numbers::pi)) {
      throw Error(ErrorCode::Divergence, "numerical divergence at t = " + std::to_string(t) + " s");
    }
    push(tr, t, vg, q.alpha, q.beta, out.sin_theta, out.cos_theta, out.theta, w);
  }
}

void run_fixed(SimTrace& tr, SignalGenerator& gen, const PllDesign& d, const SimOptions& o, std::size_t n) {
  using namespace fixed;
  Context ctx{o.arithmetic.frac_bits, 0};
  const TrigTable table(o.arithmetic.trig_table_size, ctx);
  const double ts = o.sample_period;
  const double omega0 = kTwoPi * o.nominal_hz;

  const HgiCoeffs<Coef16> cf{Coef16::from_double(d.k), Coef16::from_double(omega0 * ts),
                                Coef16::from_double(0.5 * omega0 * ts)};
  HgiStateT<Q16> st{Q16(0, &ctx), Q16(0, &ctx)};

  const Coef16 kp_ts = Coef16::from_double(d.pi.kp * ts);
  const Coef16 ki_ts2 = Coef16::from_double(d.pi.ki * ts * ts);
  const std::int32_t step0 = angle_from_double(omega0 * ts);
  const std::int32_t two_pi = angle_from_double(kTwoPi);
  std::int32_t integ = 0;  // rad per sample
  std::int32_t theta = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = gen.time();
    const Q16 vg = Q16::from_double(gen.next(), ctx);
    const QuadratureSample<Q16> q =
        o.topology == Topology::Hgi ? hgi_update(st, cf, vg) : sogi_update(st, cf, vg);
    const TrigTable::Pair uv = table.lookup(theta);
    const Q16 v_d = q.alpha * uv.cos + q.beta * uv.sin;
    const std::int32_t step =
        saturate32(std::int64_t{step0} + mul_to_angle(kp_ts, v_d, ctx) + integ, ctx);
    integ = saturate32(std::int64_t{integ} + mul_to_angle(ki_ts2, v_d, ctx), ctx);
    const std::int32_t used = theta;
    std::int64_t next = std::int64_t{theta} + step;
    if (next >= two_pi) next -= two_pi;
    if (next < 0) next += two_pi;
    theta = saturate32(next, ctx);

    push(tr, t, vg.to_double(), q.alpha.to_double(), q.beta.to_double(), uv.sin.to_double(),
         uv.cos.to_double(), angle_to_double(used), angle_to_double(step) / ts);
  }
  tr.saturations = ctx.saturations;
}

}  // namespace

void ArithmeticMode::validate() const {
  if (kind == Arithmetic::Fixed16 && (frac_bits < 8 || frac_bits > 15)) {
    throw Error(ErrorCode::InvalidArgument, "fixed-point fraction bits must lie in [8, 15]");
  }
}

std::vector<TraceChannel> SimTrace::channels() const {
  return {{"t", "s", &t},
          {"v_g", "pu", &v_g},
          {"v_alpha", "pu", &v_alpha},
          {"v_beta", "pu", &v_beta},
          {"v_d", "pu", &v_d},
          {"v_q", "pu", &v_q},
          {"omega_e", "rad/s", &omega_e},
          {"theta_e", "rad", &theta_e},
          {"sin_theta_e", "pu", &sin_theta},
          {"cos_theta_e", "pu", &cos_theta}};
}

std::vector<double> SimTrace::frequency_hz() const {
  std::vector<double> f(omega_e.size());
  std::transform(omega_e.begin(), omega_e.end(), f.begin(), [](double w) { return w / kTwoPi; });
  return f;
}

SimTrace simulate(const GridSignalSpec& scenario, const PllDesign& design, const SimOptions& opts) {
  scenario.validate();
  opts.arithmetic.validate();
  if (!(opts.sample_period > 0.0) || !(opts.duration > 0.0) || !(opts.nominal_hz > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "duration, Ts and nominal frequency must be positive");
  }
  HgiParams{design.k, kTwoPi * opts.nominal_hz}.validate();
  design.pi.validate();
  if (kTwoPi * opts.nominal_hz * opts.sample_period >= HgiFilter::kDefaultStabilityLimit) {
    throw Error(ErrorCode::InvalidArgument, "sample rate too low for Euler stability");
  }

  const auto n = static_cast<std::size_t>(std::llround(opts.duration / opts.sample_period));
  SimTrace tr;
  tr.sample_period = opts.sample_period;
  reserve_all(tr, n);
  SignalGenerator gen(scenario, opts.sample_period);
  if (opts.arithmetic.kind == Arithmetic::Float64) {
    run_float(tr, gen, design, opts, n);
  } else {
    run_fixed(tr, gen, design, opts, n);
  }
  return tr;
}

TransientMetrics transient_metrics(const SimTrace& trace, const MetricsOptions& opts) {
  const std::size_t n = trace.size();
  const double ts = trace.sample_period;
  if (n == 0 || !(ts > 0.0)) throw Error(ErrorCode::InvalidArgument, "empty trace");
  if (!(opts.band_hz > 0.0) || !(opts.fundamental_hz > 0.0) || opts.steady_cycles < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid metric options");
  }

  TransientMetrics m;
  std::size_t window = integer_cycle_window(opts.fundamental_hz, ts, opts.steady_cycles, n);
  const bool exact = window >= 5;
  if (!exact) {
    window = std::min<std::size_t>(n, static_cast<std::size_t>(
                                          std::llround(opts.steady_cycles / (opts.fundamental_hz * ts))));
  }
  const std::size_t w0 = n - window;
  m.window_seconds = static_cast<double>(window) * ts;

  const std::vector<double> f = trace.frequency_hz();
  m.final_frequency = std::accumulate(f.begin() + static_cast<std::ptrdiff_t>(w0), f.end(), 0.0) /
                      static_cast<double>(window);
  for (std::size_t i = w0; i < n; ++i) {
    m.freq_ripple_peak = std::max(m.freq_ripple_peak, std::abs(f[i] - m.final_frequency));
  }
  m.fundamental_ripple = std::abs(spectral_line(std::span(f).subspan(w0), opts.fundamental_hz, ts));
  m.steady_thd = std::numeric_limits<double>::quiet_NaN();
  if (exact && window * opts.fundamental_hz * ts >= 5.0 - 1e-9) {
    m.steady_thd = measured_thd(std::span(trace.sin_theta).subspan(w0), opts.fundamental_hz, ts);
  }

  if (!opts.event_time) return m;
  const double te = *opts.event_time;
  if (te < 0.0 || te + 0.1 > static_cast<double>(n) * ts + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "trace must extend at least 0.1 s past the event");
  }
  const auto e = static_cast<std::size_t>(std::ceil(te / ts - 1e-9));
  std::optional<std::size_t> last;
  for (std::size_t i = e; i < n; ++i) {
    const double dev = std::abs(f[i] - m.final_frequency);
    m.peak_freq_excursion = std::max(m.peak_freq_excursion, dev);
    if (dev > opts.band_hz) last = i;
  }
  if (last) {
    m.settle_time = static_cast<double>(*last + 1) * ts - te;
    m.settled = *last < w0;
  }
  return m;
}

DriftReport fixed_vs_float_drift(const GridSignalSpec& scenario, const PllDesign& design, SimOptions opts,
                                 double warmup) {
  if (!(warmup >= 0.0 && warmup < opts.duration)) {
    throw Error(ErrorCode::InvalidArgument, "warm-up must lie inside the run");
  }
  opts.arithmetic.kind = Arithmetic::Float64;
  const SimTrace a = simulate(scenario, design, opts);
  opts.arithmetic.kind = Arithmetic::Fixed16;
  const SimTrace b = simulate(scenario, design, opts);

  DriftReport r;
  r.q_format = fixed::Context{opts.arithmetic.frac_bits, 0}.q_name();
  r.saturations = b.saturations;
  const auto start = static_cast<std::size_t>(std::llround(warmup / opts.sample_period));
  for (std::size_t i = start; i < a.size(); ++i) {
    r.max_freq_dev_hz = std::max(r.max_freq_dev_hz, std::abs(a.omega_e[i] - b.omega_e[i]) / kTwoPi);
    r.max_unit_vector_dev = std::max(r.max_unit_vector_dev, std::abs(a.sin_theta[i] - b.sin_theta[i]));
  }
  MetricsOptions mo;
  mo.fundamental_hz = scenario.fundamental_frequency;
  r.float_thd = transient_metrics(a, mo).steady_thd;
  r.fixed_thd = transient_metrics(b, mo).steady_thd;
  return r;
}

}  // namespace gridlock
