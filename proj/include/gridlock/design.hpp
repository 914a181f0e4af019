#pragma once
// Parameter search for the filter gain k and the loop bandwidth f_bw.
//
// MTSD picks k for the fastest filter, then the widest bandwidth whose
// predicted unit-vector THD stays under the limit across the frequency range.
// HC-MTSD does the same with distorted input: for every bandwidth it keeps the
// k values that satisfy the limit and takes the fastest of them, then picks
// the bandwidth with the lowest combined settling time.

#include <optional>
#include <vector>

#include "gridlock/hgi.hpp"
#include "gridlock/signal_model.hpp"
#include "gridlock/srf_pll.hpp"

namespace gridlock {

struct DesignConstraints {
  double nominal_hz = 50.0;
  double delta_f = 0.08;      // fractional frequency deviation to cover
  double input_thd = 0.0;     // fraction, spread over harmonic_orders as 1/h
  double uthd_limit = 0.01;   // fraction
  double f_bw_min = 20.0;     // Hz
  double f_bw_max = 55.0;
  double f_bw_step = 0.5;
  double k_min = 0.1;
  double k_max = 4.0;
  double k_step = 0.01;
  double freq_step_hz = 2.0;  // spacing of the checked input frequencies
  std::vector<int> harmonic_orders = kDefaultHarmonicOrders;
  double settle_tolerance = 0.02;
  double sample_period = 50e-6;
  double v_m = 1.0;
  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const;

  // Nominal +- delta_f in steps of freq_step_hz, symmetric about nominal.
  std::vector<double> check_frequencies() const;
  std::vector<double> bandwidth_grid() const;
  std::vector<double> k_grid() const;
};

struct PllDesign {
  double k = 0.0;
  double f_bw = 0.0;  // Hz
  PiParams pi;
  double t_s_hgi = 0.0;  // s
  double t_s_srf = 0.0;
  double t_sd = 0.0;     // t_s_hgi + t_s_srf

  HgiParams hgi(double nominal_hz = 50.0) const { return {k, kTwoPi * nominal_hz}; }
};

PllDesign make_design(double k, double f_bw, double v_m = 1.0, double sample_period = 50e-6,
                      double nominal_hz = 50.0, double settle_tolerance = 0.02);

double additive_settling(double k, double f_bw, double omega0 = kNominalOmega, double tolerance = 0.02);

struct SweepRow {
  double f_bw = 0.0;
  double k = 0.0;       // NaN when no k qualifies
  double t_sd = 0.0;    // s, NaN when infeasible
  bool feasible = false;
  double worst_thd = 0.0;  // percent, at k
  std::size_t feasible_k_count = 0;
};

struct DesignReport {
  PllDesign design;
  std::vector<SweepRow> sweep;  // ascending f_bw
  std::vector<double> frequencies;
  // thd[i][j]: predicted unit-vector THD (percent) at frequencies[i] and
  // sweep[j].f_bw with the chosen k.
  std::vector<std::vector<double>> thd;
  bool monotone_in_bandwidth = true;
  std::size_t feasible_count = 0;
};

// Predicted THD (percent) for a clean or 1/h-distorted input at f_hz.
double predicted_thd(const HgiParams& hgi, const PiParams& pi, double f_hz, double input_thd,
                     const std::vector<int>& orders);

DesignReport mtsd_design(const DesignConstraints& c);
DesignReport hc_mtsd_design(const DesignConstraints& c);

}  // namespace gridlock
