#include "gridlock/design.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gridlock/error.hpp"
#include "gridlock/thd.hpp"
#include "gridlock/detail/parallel.hpp"

namespace gridlock {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> grid(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

// Worst predicted THD over the check frequencies; stops early once the limit
// is exceeded when `limit` is given.
double worst_thd(const HgiParams& hgi, const PiParams& pi, const DesignConstraints& c,
                 const std::vector<double>& freqs, double limit = std::numeric_limits<double>::infinity()) {
  double worst = 0.0;
  for (double f : freqs) {
    worst = std::max(worst, predicted_thd(hgi, pi, f, c.input_thd, c.harmonic_orders));
    if (worst > limit) break;
  }
  return worst;
}

void fill_thd_grid(DesignReport& r, const DesignConstraints& c) {
  const HgiParams hgi = r.design.hgi(c.nominal_hz);
  r.thd.assign(r.frequencies.size(), std::vector<double>(r.sweep.size(), 0.0));
  detail::parallel_for(r.sweep.size(), c.workers, [&](std::size_t j) {
    const PiParams pi = pi_from_bandwidth(r.sweep[j].f_bw, c.v_m, c.sample_period);
    for (std::size_t i = 0; i < r.frequencies.size(); ++i) {
      r.thd[i][j] = predicted_thd(hgi, pi, r.frequencies[i], c.input_thd, c.harmonic_orders);
    }
  });
  for (const auto& row : r.thd) {
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j] < row[j - 1] * (1.0 - 1e-9)) r.monotone_in_bandwidth = false;
    }
  }
}

std::string limit_text(const DesignConstraints& c) {
  std::ostringstream os;
  os << "unit-vector THD limit " << 100.0 * c.uthd_limit << "% not met for any f_bw in [" << c.f_bw_min
     << ", " << c.f_bw_max << "] Hz over +-" << 100.0 * c.delta_f << "% frequency deviation";
  if (c.input_thd > 0.0) os << " with " << 100.0 * c.input_thd << "% input THD";
  return os.str();
}

}  // namespace

void DesignConstraints::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(nominal_hz > 0.0)) bad("nominal frequency must be positive");
  if (!(delta_f >= 0.0 && delta_f < 0.5)) bad("delta_f must lie in [0, 0.5)");
  if (!(input_thd >= 0.0)) bad("input THD must be non-negative");
  if (!(uthd_limit > 0.0)) bad("THD limit must be positive");
  if (!(f_bw_min > 0.0 && f_bw_max >= f_bw_min)) bad("empty sweep: bandwidth range");
  if (!(f_bw_step > 0.0)) bad("bandwidth step must be positive");
  if (!(k_min > 0.0 && k_max >= k_min)) bad("empty sweep: k range");
  if (!(k_step > 0.0)) bad("k step must be positive");
  if (!(freq_step_hz > 0.0)) bad("frequency step must be positive");
  if (!(sample_period > 0.0) || !(v_m > 0.0)) bad("Ts and v_m must be positive");
  if (input_thd > 0.0 && harmonic_orders.empty()) bad("no harmonic orders");
}

std::vector<double> DesignConstraints::check_frequencies() const {
  const double span = delta_f * nominal_hz;
  const auto n = static_cast<int>(std::floor(span / freq_step_hz + 1e-9));
  std::vector<double> out;
  const bool ends_on_grid = std::abs(span - n * freq_step_hz) < 1e-9;
  if (!ends_on_grid) out.push_back(nominal_hz - span);
  for (int i = -n; i <= n; ++i) out.push_back(nominal_hz + i * freq_step_hz);
  if (!ends_on_grid) out.push_back(nominal_hz + span);
  return out;
}

std::vector<double> DesignConstraints::bandwidth_grid() const { return grid(f_bw_min, f_bw_max, f_bw_step); }
std::vector<double> DesignConstraints::k_grid() const { return grid(k_min, k_max, k_step); }

PllDesign make_design(double k, double f_bw, double v_m, double sample_period, double nominal_hz,
                      double settle_tolerance) {
  PllDesign d;
  d.k = k;
  d.f_bw = f_bw;
  d.pi = pi_from_bandwidth(f_bw, v_m, sample_period);
  d.t_s_hgi = settling_times({k, kTwoPi * nominal_hz}, settle_tolerance).hgi;
  d.t_s_srf = srf_settling_time(kTwoPi * f_bw);
  d.t_sd = d.t_s_hgi + d.t_s_srf;
  return d;
}

double additive_settling(double k, double f_bw, double omega0, double tolerance) {
  return settling_times({k, omega0}, tolerance).hgi + srf_settling_time(kTwoPi * f_bw);
}

double predicted_thd(const HgiParams& hgi, const PiParams& pi, double f_hz, double input_thd,
                     const std::vector<int>& orders) {
  GridSignalSpec spec;
  spec.fundamental_frequency = f_hz;
  if (input_thd > 0.0) spec.harmonics = harmonic_profile(input_thd, orders);
  return total_unit_vector_thd(spec, hgi, pi);
}

DesignReport mtsd_design(const DesignConstraints& c) {
  c.validate();
  if (c.input_thd != 0.0) throw Error(ErrorCode::InvalidArgument, "mtsd design takes no input harmonics");
  DesignReport r;
  r.frequencies = c.check_frequencies();
  const double omega0 = kTwoPi * c.nominal_hz;
  const KOptimum ko = k_opt_search(omega0, c.k_min, c.k_max, c.k_step, c.settle_tolerance);
  const HgiParams hgi{ko.k, omega0};
  const double limit = 100.0 * c.uthd_limit;

  const std::vector<double> bws = c.bandwidth_grid();
  r.sweep.resize(bws.size());
  detail::parallel_for(bws.size(), c.workers, [&](std::size_t j) {
    SweepRow& row = r.sweep[j];
    row.f_bw = bws[j];
    row.k = ko.k;
    row.worst_thd = worst_thd(hgi, pi_from_bandwidth(bws[j], c.v_m, c.sample_period), c, r.frequencies);
    row.feasible = row.worst_thd <= limit;
    row.feasible_k_count = row.feasible ? 1 : 0;
    row.t_sd = row.feasible ? ko.t_s_hgi + srf_settling_time(kTwoPi * bws[j]) : kNaN;
  });

  std::optional<std::size_t> best;
  for (std::size_t j = bws.size(); j-- > 0;) {
    if (r.sweep[j].feasible) {
      if (!best) best = j;
      ++r.feasible_count;
    }
  }
  if (!best) throw Error(ErrorCode::Infeasible, "constraints infeasible: " + limit_text(c));
  r.design = make_design(ko.k, bws[*best], c.v_m, c.sample_period, c.nominal_hz, c.settle_tolerance);
  fill_thd_grid(r, c);
  return r;
}

DesignReport hc_mtsd_design(const DesignConstraints& c) {
  c.validate();
  DesignReport r;
  r.frequencies = c.check_frequencies();
  const double omega0 = kTwoPi * c.nominal_hz;
  const double limit = 100.0 * c.uthd_limit;

  const std::vector<double> ks = c.k_grid();
  std::vector<double> ts(ks.size());
  detail::parallel_for(ks.size(), c.workers,
                       [&](std::size_t i) { ts[i] = settling_times({ks[i], omega0}, c.settle_tolerance).hgi; });

  const std::vector<double> bws = c.bandwidth_grid();
  r.sweep.resize(bws.size());
  detail::parallel_for(bws.size(), c.workers, [&](std::size_t j) {
    SweepRow& row = r.sweep[j];
    row.f_bw = bws[j];
    row.k = kNaN;
    row.t_sd = kNaN;
    const PiParams pi = pi_from_bandwidth(bws[j], c.v_m, c.sample_period);
    double best_ts = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const double w = worst_thd({ks[i], omega0}, pi, c, r.frequencies, limit);
      if (w > limit) continue;
      ++row.feasible_k_count;
      if (ts[i] < best_ts) {
        best_ts = ts[i];
        row.k = ks[i];
        row.worst_thd = w;
      }
    }
    if (row.feasible_k_count > 0) {
      row.feasible = true;
      row.t_sd = best_ts + srf_settling_time(kTwoPi * bws[j]);
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < bws.size(); ++j) {
    if (!r.sweep[j].feasible) continue;
    ++r.feasible_count;
    if (!best || r.sweep[j].t_sd < r.sweep[*best].t_sd) best = j;
  }
  if (!best) throw Error(ErrorCode::Infeasible, "constraints infeasible: " + limit_text(c));
  r.design = make_design(r.sweep[*best].k, bws[*best], c.v_m, c.sample_period, c.nominal_hz, c.settle_tolerance);
  fill_thd_grid(r, c);
  return r;
}

}  // namespace gridlock
