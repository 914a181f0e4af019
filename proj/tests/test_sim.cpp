#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "gridlock/error.hpp"
#include "gridlock/sim.hpp"
#include "gridlock/thd.hpp"
#include "sim_helpers.hpp"

using namespace gridlock;
using Catch::Matchers::WithinAbs;
using testutil::distorted;
using testutil::simulated_thd;

namespace {

const PllDesign kFast = make_design(1.56, 55.0);
const PllDesign kSlow = make_design(1.56, 29.0);

GridSignalSpec phase_jump(double at = 0.5, double rad = std::numbers::pi / 2) {
  GridSignalSpec s;
  s.events.push_back({at, EventKind::PhaseJump, rad});
  return s;
}

TransientMetrics jump_metrics(const PllDesign& d, double band = 0.5) {
  SimOptions o;
  o.duration = 1.0;
  MetricsOptions m;
  m.event_time = 0.5;
  m.band_hz = band;
  return transient_metrics(simulate(phase_jump(), d, o), m);
}

TransientMetrics steady(const GridSignalSpec& s, const PllDesign& d, SimOptions o, int cycles = 10) {
  MetricsOptions m;
  m.fundamental_hz = s.fundamental_frequency;
  m.steady_cycles = cycles;
  return transient_metrics(simulate(s, d, o), m);
}

}  // namespace

TEST_CASE("trace layout", "[sim]") {
  SimOptions o;
  o.duration = 0.05;
  const SimTrace tr = simulate(GridSignalSpec{}, kFast, o);
  REQUIRE(tr.size() == 1000);
  CHECK(tr.sample_period == 50e-6);
  const auto ch = tr.channels();
  REQUIRE(ch.size() == 10);
  CHECK(std::strcmp(ch[0].name, "t") == 0);
  CHECK(std::strcmp(ch[7].name, "theta_e") == 0);
  CHECK(std::strcmp(ch[6].unit, "rad/s") == 0);
  for (const auto& c : ch) CHECK(c.data->size() == tr.size());
  CHECK_THAT(tr.t[999], WithinAbs(999 * 50e-6, 1e-15));
  CHECK_THAT(tr.frequency_hz()[5], WithinAbs(tr.omega_e[5] / (2 * std::numbers::pi), 1e-12));
}

TEST_CASE("clean 50 Hz input locks", "[sim]") {
  for (const PllDesign& d : {kFast, kSlow, make_design(0.8, 20.0)}) {
    SimOptions o;
    o.duration = 1.0;
    const auto m = steady(GridSignalSpec{}, d, o);
    CHECK_THAT(m.final_frequency, WithinAbs(50.0, 0.01));
    CHECK(m.steady_thd < 0.05);
    CHECK(m.settle_time == 0.0);
    CHECK(m.settled);
  }
  SimOptions o;
  o.duration = 1.0;
  o.topology = Topology::BasicSogi;
  CHECK_THAT(steady(GridSignalSpec{}, kFast, o).final_frequency, WithinAbs(50.0, 0.01));
}

TEST_CASE("dc offset: HGI frequency stays flat, basic SOGI ripples", "[sim]") {
  GridSignalSpec s;
  s.dc_offset = 0.1;
  SimOptions o;
  o.duration = 3.0;
  const auto hgi = steady(s, kFast, o, 50);
  o.topology = Topology::BasicSogi;
  const auto sogi = steady(s, kFast, o, 50);
  CHECK(hgi.fundamental_ripple < 0.05);
  CHECK(hgi.freq_ripple_peak < 0.05);
  CHECK(sogi.fundamental_ripple > 0.5);
  CHECK(sogi.fundamental_ripple >= 10 * hgi.fundamental_ripple);
}

TEST_CASE("pi/2 phase jump settling", "[sim]") {
  const auto a = jump_metrics(kFast);
  const auto b = jump_metrics(kSlow);
  CHECK(a.settled);
  CHECK(b.settled);
  CHECK_THAT(a.settle_time * 1e3, WithinAbs(20.0, 5.0));
  CHECK_THAT(b.settle_time * 1e3, WithinAbs(30.0, 7.0));
  CHECK(a.settle_time <= kFast.t_sd);
  CHECK(b.settle_time <= kSlow.t_sd);
  CHECK(a.peak_freq_excursion > 0.5);
  CHECK_THAT(a.final_frequency, WithinAbs(50.0, 0.01));
}

TEST_CASE("settling bounded by t_sd for the searched designs", "[sim]") {
  const PllDesign m = mtsd_design(DesignConstraints{}).design;
  DesignConstraints c;
  c.input_thd = 0.05;
  const PllDesign h = hc_mtsd_design(c).design;
  const auto a = jump_metrics(m);
  const auto b = jump_metrics(h);
  CHECK(a.settle_time <= m.t_sd);
  CHECK(b.settle_time <= h.t_sd);
  // Frozen from the float64 run.
  CHECK_THAT(a.settle_time * 1e3, WithinAbs(22.65, 0.05));
  CHECK_THAT(b.settle_time * 1e3, WithinAbs(31.95, 0.05));
}

TEST_CASE("settling is non-increasing in bandwidth", "[sim]") {
  double prev = 1e9;
  for (double fbw : {20.0, 29.0, 55.0}) {
    const double t = jump_metrics(make_design(1.56, fbw)).settle_time;
    CHECK(t <= prev);
    prev = t;
  }
}

TEST_CASE("metric edge cases", "[sim]") {
  SimOptions o;
  o.duration = 0.55;
  const SimTrace tr = simulate(phase_jump(), kFast, o);
  MetricsOptions m;
  m.event_time = 0.5;
  try {
    transient_metrics(tr, m);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "trace must extend at least 0.1 s past the event");
  }

  // A very slow loop is still outside the band when the run ends.
  o.duration = 0.62;
  const SimTrace slow = simulate(phase_jump(), make_design(1.56, 5.0), o);
  const auto r = transient_metrics(slow, m);
  CHECK_FALSE(r.settled);
}

TEST_CASE("runaway loops are reported as divergence", "[sim]") {
  for (double kp : {1e7, std::numeric_limits<double>::infinity()}) {
    PllDesign d = kFast;
    d.pi.kp = kp;
    SimOptions o;
    o.duration = 0.2;
    try {
      simulate(GridSignalSpec{}, d, o);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Divergence);
      CHECK_THAT(std::string(e.what()), Catch::Matchers::StartsWith("numerical divergence"));
    }
  }
}

TEST_CASE("invalid simulation options", "[sim]") {
  SimOptions o;
  o.arithmetic.kind = Arithmetic::Fixed16;
  o.arithmetic.frac_bits = 16;
  CHECK_THROWS_AS(simulate(GridSignalSpec{}, kFast, o), Error);
  o.arithmetic.frac_bits = 14;
  o.arithmetic.trig_table_size = 1000;
  CHECK_THROWS_AS(simulate(GridSignalSpec{}, kFast, o), Error);
  SimOptions slow;
  slow.sample_period = 1e-3;
  CHECK_THROWS_AS(simulate(GridSignalSpec{}, kFast, slow), Error);
  SimOptions none;
  none.duration = 0.0;
  CHECK_THROWS_AS(simulate(GridSignalSpec{}, kFast, none), Error);
}

TEST_CASE("reruns are bit-identical", "[sim]") {
  GridSignalSpec s = distorted(47.0, 0.05);
  s.events.push_back({0.2, EventKind::PhaseJump, 0.7});
  for (Arithmetic kind : {Arithmetic::Float64, Arithmetic::Fixed16}) {
    SimOptions o;
    o.duration = 0.4;
    o.arithmetic.kind = kind;
    const auto a = simulate(s, kFast, o);
    const auto b = simulate(s, kFast, o);
    CHECK(a.v_beta == b.v_beta);
    CHECK(a.omega_e == b.omega_e);
    CHECK(a.theta_e == b.theta_e);
    CHECK(a.sin_theta == b.sin_theta);
  }
}

TEST_CASE("bounded channels without events", "[sim]") {
  const GridSignalSpec s = distorted(46.0, 0.05);
  double peak = 1.0;
  for (const auto& h : s.harmonics) peak += h.amplitude;
  for (Arithmetic kind : {Arithmetic::Float64, Arithmetic::Fixed16}) {
    SimOptions o;
    o.duration = 1.0;
    o.arithmetic.kind = kind;
    const auto tr = simulate(s, kFast, o);
    for (const auto* ch : {&tr.v_g, &tr.v_alpha, &tr.v_beta, &tr.v_d, &tr.v_q, &tr.sin_theta, &tr.cos_theta}) {
      for (double v : *ch) REQUIRE(std::abs(v) <= 2 * peak);
    }
  }
}

TEST_CASE("analytical and simulated THD agree on the full grid", "[sim][oracle]") {
  for (const PllDesign& d : {kFast, kSlow}) {
    for (double thd : {0.0, 0.025, 0.05}) {
      for (double f : {46.0, 48.0, 50.0, 52.0, 54.0}) {
        CAPTURE(d.f_bw, thd, f);
        const double a = predicted_thd(d.hgi(), d.pi, f, thd, kDefaultHarmonicOrders);
        const double s = simulated_thd(distorted(f, thd), d);
        CHECK(std::abs(a - s) <= 0.2);
      }
    }
  }
}

TEST_CASE("simulated THD at 46 Hz with 5% input", "[sim]") {
  CHECK_THAT(simulated_thd(distorted(46, 0.05), kSlow), WithinAbs(0.9, 0.2));
  CHECK_THAT(simulated_thd(distorted(46, 0.05), kFast), WithinAbs(1.6, 0.2));
}

TEST_CASE("fixed point follows float", "[sim][fixed]") {
  SimOptions o;
  o.duration = 1.0;
  const auto clean = fixed_vs_float_drift(GridSignalSpec{}, kFast, o);
  CHECK(clean.q_format == "Q2.14");
  CHECK(clean.max_freq_dev_hz < 0.1);
  CHECK(clean.saturations == 0);

  const auto dist = fixed_vs_float_drift(distorted(46, 0.05), kSlow, o);
  CHECK(std::abs(dist.fixed_thd - dist.float_thd) <= 0.3);
  CHECK(dist.max_freq_dev_hz < 0.1);

  o.arithmetic.frac_bits = 15;
  const auto tight = fixed_vs_float_drift(distorted(46, 0.05), kSlow, o);
  CHECK(tight.q_format == "Q1.15");
  CHECK(tight.saturations > 0);
  CHECK_THROWS_AS(fixed_vs_float_drift(GridSignalSpec{}, kFast, o, 2.0), Error);
}

TEST_CASE("zero input stays at zero in both modes", "[sim][fixed]") {
  GridSignalSpec s;
  s.fundamental_amplitude = 0.0;
  for (Arithmetic kind : {Arithmetic::Float64, Arithmetic::Fixed16}) {
    SimOptions o;
    o.duration = 0.3;
    o.arithmetic.kind = kind;
    const auto tr = simulate(s, kFast, o);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      REQUIRE(tr.v_alpha[i] == 0.0);
      REQUIRE(tr.v_beta[i] == 0.0);
      REQUIRE(tr.v_d[i] == 0.0);
    }
    CHECK_THAT(tr.omega_e.back(), WithinAbs(kNominalOmega, 1e-3));
  }
}
