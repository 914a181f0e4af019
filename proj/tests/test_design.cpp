#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "gridlock/design.hpp"
#include "gridlock/error.hpp"
#include "gridlock/thd.hpp"
#include "oracles.hpp"

using namespace gridlock;
using Catch::Matchers::StartsWith;
using Catch::Matchers::WithinAbs;

namespace {

DesignConstraints hc_defaults() {
  DesignConstraints c;
  c.input_thd = 0.05;
  return c;
}

bool same_report(const DesignReport& a, const DesignReport& b) {
  if (a.sweep.size() != b.sweep.size() || a.thd != b.thd) return false;
  for (std::size_t i = 0; i < a.sweep.size(); ++i) {
    const auto& x = a.sweep[i];
    const auto& y = b.sweep[i];
    const bool k_same = (std::isnan(x.k) && std::isnan(y.k)) || x.k == y.k;
    const bool t_same = (std::isnan(x.t_sd) && std::isnan(y.t_sd)) || x.t_sd == y.t_sd;
    if (!k_same || !t_same || x.feasible != y.feasible || x.feasible_k_count != y.feasible_k_count) return false;
  }
  return a.design.k == b.design.k && a.design.f_bw == b.design.f_bw && a.design.t_sd == b.design.t_sd;
}

}  // namespace

TEST_CASE("additive settling", "[design]") {
  CHECK_THAT(additive_settling(1.56, 55) * 1e3, WithinAbs(27.6, 0.5));
  CHECK_THAT(additive_settling(1.56, 29) * 1e3, WithinAbs(37.9, 0.5));
  const double t_hgi = settling_times({1.56, kNominalOmega}).hgi;
  CHECK_THAT(additive_settling(1.56, 1e9), WithinAbs(t_hgi, 1e-9));
  const PllDesign d = make_design(1.56, 55);
  CHECK(d.t_sd == d.t_s_hgi + d.t_s_srf);
  CHECK(d.t_sd == additive_settling(1.56, 55));
}

TEST_CASE("constraint grids", "[design]") {
  DesignConstraints c;
  const auto f = c.check_frequencies();
  REQUIRE(f.size() == 5);
  CHECK(f.front() == 46.0);
  CHECK(f.back() == 54.0);
  CHECK(f[2] == 50.0);
  CHECK(c.bandwidth_grid().size() == 71);
  CHECK(c.k_grid().size() == 391);
  c.delta_f = 0.0;
  CHECK(c.check_frequencies() == std::vector<double>{50.0});
  DesignConstraints bad;
  bad.uthd_limit = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.f_bw_min = 60.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("MTSD with +-8% deviation and a 1% limit", "[design]") {
  const DesignReport r = mtsd_design(DesignConstraints{});
  CHECK_THAT(r.design.k, WithinAbs(1.56, 1e-9));
  // Grid answer below the analytical crossing checked in the oracle case.
  CHECK_THAT(r.design.f_bw, WithinAbs(52.5, 1e-9));
  CHECK_THAT(r.design.t_sd * 1e3, WithinAbs(28.098, 1e-3));
  CHECK_THAT(r.design.t_sd * 1e3, WithinAbs(27.6, 0.5));
  CHECK(r.monotone_in_bandwidth);
  CHECK(r.feasible_count == 66);
  CHECK(r.frequencies.size() == 5);
  CHECK(r.thd.size() == 5);
  CHECK(r.thd[0].size() == r.sweep.size());
}

TEST_CASE("MTSD bandwidth sits at the grid step below the oracle crossing", "[design][oracle]") {
  // Bisect the bandwidth where the worst 2w ripple reaches 1%.
  auto worst = [](double fbw) {
    const PiParams pi = pi_from_bandwidth(fbw, 1.0, 50e-6);
    double u = 0.0;
    for (double f : {46.0, 48.0, 52.0, 54.0}) {
      u = std::max(u, oracle::freq_dev_u3(1.56, kNominalOmega, pi.kp, pi.ki, kTwoPi * f));
    }
    return u;
  };
  double lo = 20.0, hi = 80.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (worst(mid) <= 0.01 ? lo : hi) = mid;
  }
  CHECK_THAT(lo, WithinAbs(52.9, 0.1));
  const DesignReport r = mtsd_design(DesignConstraints{});
  CHECK(r.design.f_bw == std::floor(lo / 0.5) * 0.5);
}

TEST_CASE("MTSD edge cases", "[design]") {
  DesignConstraints c;
  c.delta_f = 0.0;
  CHECK(mtsd_design(c).design.f_bw == 55.0);

  c = {};
  c.uthd_limit = 0.005;
  CHECK(mtsd_design(c).design.f_bw < 55.0);

  c = {};
  c.input_thd = 0.05;
  CHECK_THROWS_AS(mtsd_design(c), Error);

  c = {};
  c.uthd_limit = 1e-5;
  try {
    mtsd_design(c);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
    CHECK_THAT(std::string(e.what()), StartsWith("constraints infeasible"));
  }
}

TEST_CASE("HC-MTSD with 5% input THD", "[design]") {
  const DesignReport r = hc_mtsd_design(hc_defaults());
  CHECK_THAT(r.design.f_bw, WithinAbs(28.0, 1e-9));
  CHECK_THAT(r.design.k, WithinAbs(1.56, 1e-9));
  CHECK_THAT(r.design.t_sd * 1e3, WithinAbs(38.709, 1e-3));
  CHECK_THAT(r.design.f_bw, WithinAbs(29.0, 1.0));
  CHECK_THAT(r.design.t_sd * 1e3, WithinAbs(37.9, 1.0));

  // The returned bandwidth is the grid minimum of t_sd.
  double best = 1e9;
  for (const auto& row : r.sweep) {
    if (row.feasible) best = std::min(best, row.t_sd);
  }
  CHECK(best == r.design.t_sd);
}

TEST_CASE("HC-MTSD certificate holds at every grid corner", "[design]") {
  const DesignConstraints c = hc_defaults();
  const DesignReport r = hc_mtsd_design(c);
  for (double f : c.check_frequencies()) {
    CHECK(predicted_thd(r.design.hgi(), r.design.pi, f, c.input_thd, c.harmonic_orders) <= 100 * c.uthd_limit + 1e-6);
  }
}

TEST_CASE("harmonics never widen the bandwidth", "[design]") {
  const double mtsd_bw = mtsd_design(DesignConstraints{}).design.f_bw;
  for (double h : {0.0, 0.01, 0.03, 0.05}) {
    DesignConstraints c;
    c.input_thd = h;
    CHECK(hc_mtsd_design(c).design.f_bw <= mtsd_bw + 1e-12);
  }
  DesignConstraints zero;
  const DesignReport hz = hc_mtsd_design(zero);
  CHECK(hz.design.f_bw == mtsd_bw);
  CHECK(hz.design.k == 1.56);
}

TEST_CASE("designs are identical for any worker count", "[design]") {
  DesignConstraints c1 = hc_defaults(), c4 = hc_defaults();
  c1.workers = 1;
  c4.workers = 4;
  CHECK(same_report(hc_mtsd_design(c1), hc_mtsd_design(c4)));
  DesignConstraints m1, m3;
  m1.workers = 1;
  m3.workers = 3;
  CHECK(same_report(mtsd_design(m1), mtsd_design(m3)));
}
