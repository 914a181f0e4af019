// gridlock: design, simulate, analyze, sweep and compare HGI-PLL setups.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridlock/design.hpp"
#include "gridlock/detail/parallel.hpp"
#include "gridlock/error.hpp"
#include "gridlock/io.hpp"
#include "gridlock/sim.hpp"
#include "gridlock/thd.hpp"

namespace fs = std::filesystem;
using namespace gridlock;
using io::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInfeasible = 2, kSchema = 3, kDivergence = 4 };

struct Common {
  std::string out;
  unsigned workers = 0;
};

fs::path output_dir(const Common& c) {
  fs::path dir = "out";
  if (const char* env = std::getenv("GRIDLOCK_OUT"); env && *env) dir = env;
  if (!c.out.empty()) dir = c.out;
  fs::create_directories(dir);
  return dir;
}

struct ConstraintArgs {
  DesignConstraints c;
  std::string method = "mtsd";
};

void add_constraint_flags(CLI::App* app, ConstraintArgs& a) {
  auto& c = a.c;
  app->add_option("--method", a.method, "Design procedure")->check(CLI::IsMember({"mtsd", "hc-mtsd"}));
  app->add_option("--delta-f", c.delta_f, "Frequency deviation to cover (fraction)")->check(CLI::Range(0.0, 0.49));
  app->add_option("--input-thd", c.input_thd, "Input THD (fraction)")->check(CLI::Range(0.0, 1.0));
  app->add_option("--uthd-limit", c.uthd_limit, "Unit-vector THD limit (fraction)")->check(CLI::Range(1e-6, 0.999));
  app->add_option("--fbw-min", c.f_bw_min, "Lowest bandwidth (Hz)");
  app->add_option("--fbw-max", c.f_bw_max, "Highest bandwidth (Hz)");
  app->add_option("--fbw-step", c.f_bw_step, "Bandwidth step (Hz)");
  app->add_option("--k-min", c.k_min, "Lowest k");
  app->add_option("--k-max", c.k_max, "Highest k");
  app->add_option("--k-step", c.k_step, "k step");
  app->add_option("--freq-step", c.freq_step_hz, "Frequency step of the deviation check (Hz)");
  app->add_option("--nominal", c.nominal_hz, "Nominal grid frequency (Hz)");
  app->add_option("--ts", c.sample_period, "Sample period (s)");
  app->add_option("--vm", c.v_m, "Nominal voltage peak (pu)");
}

DesignReport run_design(const ConstraintArgs& a) {
  return a.method == "mtsd" ? mtsd_design(a.c) : hc_mtsd_design(a.c);
}

// Design source shared by simulate / analyze / sweep: a design.json, inline
// k and f_bw, or a fresh run of a procedure.
struct DesignSource {
  std::string file;
  std::optional<double> k;
  std::optional<double> f_bw;
  std::string method;
  double ts = 50e-6;
  double nominal = 50.0;
};

void add_design_flags(CLI::App* app, DesignSource& d) {
  app->add_option("--design", d.file, "design.json from the design command")->check(CLI::ExistingFile);
  app->add_option("--k", d.k, "Filter gain k (inline design)")->check(CLI::PositiveNumber);
  app->add_option("--fbw", d.f_bw, "Loop bandwidth in Hz (inline design)")->check(CLI::PositiveNumber);
  app->add_option("--method", d.method, "Run a design procedure instead")->check(CLI::IsMember({"mtsd", "hc-mtsd"}));
  app->add_option("--ts", d.ts, "Sample period for inline designs (s)")->check(CLI::PositiveNumber);
  app->add_option("--nominal", d.nominal, "Nominal grid frequency (Hz)")->check(CLI::PositiveNumber);
}

io::DesignFile resolve_design(const DesignSource& d, unsigned workers) {
  if (!d.file.empty()) return io::load_design(d.file);
  if (d.k || d.f_bw) {
    if (!d.k || !d.f_bw) throw Error(ErrorCode::InvalidArgument, "inline design needs both --k and --fbw");
    return {"manual", make_design(*d.k, *d.f_bw, 1.0, d.ts, d.nominal), d.nominal, 1.0};
  }
  DesignConstraints c;
  c.nominal_hz = d.nominal;
  c.sample_period = d.ts;
  c.workers = workers;
  const std::string method = d.method.empty() ? "mtsd" : d.method;
  if (method == "hc-mtsd") c.input_thd = 0.05;
  const DesignReport r = method == "mtsd" ? mtsd_design(c) : hc_mtsd_design(c);
  return {method, r.design, d.nominal, 1.0};
}

std::optional<double> first_event_time(const GridSignalSpec& s) {
  if (s.events.empty()) return std::nullopt;
  return s.events.front().time;
}

double final_frequency(const GridSignalSpec& s) {
  double f = s.fundamental_frequency;
  for (const auto& e : s.events) {
    if (e.kind == EventKind::FrequencyStep) f = e.value;
  }
  return f;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find(',', pos);
    const std::string tok = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("bad number in ") + what + ": '" + tok + "'");
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

std::vector<double> range_list(double lo, double hi, double step) {
  std::vector<double> out;
  if (!(step > 0.0) || hi < lo) return out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

// ---------------------------------------------------------------------------

int cmd_design(const ConstraintArgs& a, const Common& common) {
  ConstraintArgs args = a;
  args.c.workers = common.workers;
  if (args.method == "mtsd" && args.c.input_thd > 0.0) {
    throw Error(ErrorCode::InvalidArgument, "mtsd ignores input harmonics; use --method hc-mtsd with --input-thd");
  }
  const DesignReport r = run_design(args);
  const fs::path dir = output_dir(common);
  io::write_json(dir / "design.json",
                 io::design_to_json({args.method, r.design, args.c.nominal_hz, args.c.v_m}, &args.c, &r));
  io::write_csv(dir / "sweep.csv", io::sweep_table(r));
  std::cout << args.method << ": k = " << r.design.k << ", f_bw = " << r.design.f_bw
            << " Hz, t_sd = " << 1e3 * r.design.t_sd << " ms (" << r.feasible_count << "/" << r.sweep.size()
            << " bandwidths feasible)\n";
  if (!r.monotone_in_bandwidth) std::cout << "warning: predicted THD is not monotone in bandwidth\n";
  return kOk;
}

struct SimArgs {
  std::string scenario;
  DesignSource design;
  std::optional<double> duration;
  std::string mode = "float64";
  int q_bits = 14;
  std::size_t table = 1024;
  std::string topology = "hgi";
  double band = 0.5;
  std::optional<double> event_time;
  bool binary = false;
  std::string prefix;
};

int cmd_simulate(const SimArgs& a, const Common& common) {
  const io::Scenario sc = io::load_scenario(a.scenario);
  const io::DesignFile df = resolve_design(a.design, common.workers);
  SimOptions o;
  o.duration = a.duration.value_or(sc.duration.value_or(1.0));
  o.sample_period = df.design.pi.sample_period;
  o.nominal_hz = df.nominal_hz;
  o.arithmetic.kind = a.mode == "fixed16" ? Arithmetic::Fixed16 : Arithmetic::Float64;
  o.arithmetic.frac_bits = a.q_bits;
  o.arithmetic.trig_table_size = a.table;
  o.topology = a.topology == "hgi" ? Topology::Hgi : Topology::BasicSogi;

  const SimTrace tr = simulate(sc.spec, df.design, o);
  MetricsOptions mo;
  mo.event_time = a.event_time ? a.event_time : first_event_time(sc.spec);
  mo.band_hz = a.band;
  mo.fundamental_hz = final_frequency(sc.spec);
  const TransientMetrics m = transient_metrics(tr, mo);

  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["kind"] = "sim_metrics";
  j["scenario"] = sc.name.empty() ? fs::path(a.scenario).stem().string() : sc.name;
  j["topology"] = a.topology;
  j["arithmetic"] = {{"mode", a.mode}};
  if (o.arithmetic.kind == Arithmetic::Fixed16) {
    j["arithmetic"]["q_format"] = "Q" + std::to_string(16 - a.q_bits) + "." + std::to_string(a.q_bits);
    j["arithmetic"]["trig_table_size"] = a.table;
    j["arithmetic"]["saturations"] = tr.saturations;
  }
  j["design"] = {{"method", df.method}, {"k", df.design.k}, {"f_bw_hz", df.design.f_bw},
                 {"t_sd_ms", 1e3 * df.design.t_sd}};
  j["duration_s"] = o.duration;
  j["sample_period_s"] = o.sample_period;
  j["settling_band_hz"] = a.band;
  j["event_time_s"] = mo.event_time ? json(*mo.event_time) : json(nullptr);
  j["metrics"] = io::metrics_to_json(m);

  const fs::path dir = output_dir(common);
  io::write_json(dir / (a.prefix + "metrics.json"), j);
  io::write_csv(dir / (a.prefix + "trace.csv"), io::trace_table(tr));
  if (a.binary) io::write_trace_binary(dir / (a.prefix + "trace.bin"), tr);
  std::cout << j["metrics"].dump(2) << '\n';
  return kOk;
}

struct AnalyzeArgs {
  std::string scenario;
  double freq = 50.0;
  double input_thd = 0.0;
  DesignSource design;
};

int cmd_analyze(const AnalyzeArgs& a, const Common& common) {
  io::Scenario sc;
  if (!a.scenario.empty()) {
    sc = io::load_scenario(a.scenario);
  } else {
    sc.spec.fundamental_frequency = a.freq;
    if (a.input_thd > 0.0) sc.spec.harmonics = harmonic_profile(a.input_thd);
  }
  const io::DesignFile df = resolve_design(a.design, common.workers);
  const ThdBreakdown b = unit_vector_thd_breakdown(sc.spec, df.design.hgi(df.nominal_hz), df.design.pi);

  io::CsvTable t;
  t.header = {"order", "amplitude_percent", "phase_rad", "in_thd"};
  for (const auto& [order, z] : b.orders) {
    t.rows.push_back({std::to_string(order), io::csv_number(100.0 * std::abs(z)), io::csv_number(std::arg(z)),
                      order >= 2 ? "true" : "false"});
  }
  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["kind"] = "uthd_breakdown";
  j["design"] = {{"k", df.design.k}, {"f_bw_hz", df.design.f_bw}};
  j["fundamental_hz"] = sc.spec.fundamental_frequency;
  j["uthd_percent"] = b.thd_percent;
  j["fundamental_ripple_percent"] = 100.0 * b.fundamental_ripple;
  j["v1_plus"] = b.v1_plus;
  j["delta_rad"] = b.delta;
  const fs::path dir = output_dir(common);
  io::write_csv(dir / "analyze.csv", t);
  io::write_json(dir / "analyze.json", j);
  std::cout << "unit-vector THD = " << b.thd_percent << " %\n";
  return kOk;
}

struct SweepArgs {
  DesignSource design;
  std::string freqs = "46,48,50,52,54";
  double thd_min = 0.0;
  double thd_max = 0.05;
  double thd_step = 0.005;
};

int cmd_sweep(const SweepArgs& a, const Common& common) {
  const std::vector<double> freqs = parse_list(a.freqs, "--freqs");
  const std::vector<double> thds = range_list(a.thd_min, a.thd_max, a.thd_step);
  if (freqs.empty() || thds.empty()) throw Error(ErrorCode::InvalidArgument, "empty sweep");
  const io::DesignFile df = resolve_design(a.design, common.workers);
  const HgiParams hgi = df.design.hgi(df.nominal_hz);

  std::vector<double> grid(freqs.size() * thds.size());
  detail::parallel_for(grid.size(), common.workers, [&](std::size_t i) {
    grid[i] = predicted_thd(hgi, df.design.pi, freqs[i / thds.size()], thds[i % thds.size()], kDefaultHarmonicOrders);
  });
  io::CsvTable t;
  t.header = {"frequency_hz", "input_thd_percent", "uthd_percent"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({io::csv_number(freqs[i / thds.size()]), io::csv_number(100.0 * thds[i % thds.size()]),
                      io::csv_number(grid[i])});
  }
  io::write_csv(output_dir(common) / "sweep_thd.csv", t);
  std::cout << grid.size() << " grid points written\n";
  return kOk;
}

struct CompareArgs {
  std::string fbws;  // empty: run both procedures
  double k = 1.56;
  std::string freqs = "46,48,50,52,54";
  double input_thd = 0.05;
  double duration = 1.5;
  double ts = 50e-6;
};

int cmd_compare(const CompareArgs& a, const Common& common) {
  std::vector<std::pair<std::string, PllDesign>> designs;
  if (a.fbws.empty()) {
    DesignConstraints c;
    c.sample_period = a.ts;
    c.workers = common.workers;
    designs.emplace_back("mtsd", mtsd_design(c).design);
    c.input_thd = 0.05;
    designs.emplace_back("hc-mtsd", hc_mtsd_design(c).design);
  } else {
    for (double f : parse_list(a.fbws, "--fbw")) {
      designs.emplace_back("f_bw=" + io::csv_number(f), make_design(a.k, f, 1.0, a.ts));
    }
  }
  const std::vector<double> freqs = parse_list(a.freqs, "--freqs");
  if (designs.empty() || freqs.empty()) throw Error(ErrorCode::InvalidArgument, "empty sweep");

  const std::size_t n = designs.size() * freqs.size();
  std::vector<double> ana(n), sim(n);
  detail::parallel_for(n, common.workers, [&](std::size_t i) {
    const PllDesign& d = designs[i / freqs.size()].second;
    GridSignalSpec spec;
    spec.fundamental_frequency = freqs[i % freqs.size()];
    if (a.input_thd > 0.0) spec.harmonics = harmonic_profile(a.input_thd);
    ana[i] = total_unit_vector_thd(spec, d.hgi(), d.pi);
    SimOptions o;
    o.duration = a.duration;
    o.sample_period = a.ts;
    MetricsOptions mo;
    mo.fundamental_hz = spec.fundamental_frequency;
    sim[i] = transient_metrics(simulate(spec, d, o), mo).steady_thd;
  });

  io::CsvTable t;
  t.header = {"design", "k", "f_bw_hz", "frequency_hz", "analytical_uthd_percent", "simulated_uthd_percent",
              "difference_pp"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [name, d] = designs[i / freqs.size()];
    t.rows.push_back({name, io::csv_number(d.k), io::csv_number(d.f_bw), io::csv_number(freqs[i % freqs.size()]),
                      io::csv_number(ana[i]), io::csv_number(sim[i]), io::csv_number(sim[i] - ana[i])});
    std::cout << name << " " << freqs[i % freqs.size()] << " Hz: analytical " << ana[i] << " %, simulated "
              << sim[i] << " %\n";
  }
  io::write_csv(output_dir(common) / "compare.csv", t);
  return kOk;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::Infeasible: return kInfeasible;
    case ErrorCode::Schema: return kSchema;
    case ErrorCode::Divergence: return kDivergence;
    default: return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HGI-PLL design and simulation toolkit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "Output directory (default: $GRIDLOCK_OUT or ./out)");
  app.add_option("--workers", common.workers, "Worker threads for sweeps (0: all cores)");

  ConstraintArgs dargs;
  auto* design = app.add_subcommand("design", "Run the MTSD or HC-MTSD procedure");
  add_constraint_flags(design, dargs);

  SimArgs sargs;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a scenario and extract metrics");
  simulate_cmd->add_option("--scenario", sargs.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_design_flags(simulate_cmd, sargs.design);
  simulate_cmd->add_option("--duration", sargs.duration, "Simulated time (s)")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--mode", sargs.mode, "Arithmetic")->check(CLI::IsMember({"float64", "fixed16"}));
  simulate_cmd->add_option("--q-bits", sargs.q_bits, "Fraction bits for fixed16")->check(CLI::Range(8, 15));
  simulate_cmd->add_option("--trig-table", sargs.table, "Sine table size for fixed16 (power of two)");
  simulate_cmd->add_option("--topology", sargs.topology, "Quadrature filter")
      ->check(CLI::IsMember({"hgi", "basic-sogi"}));
  simulate_cmd->add_option("--band", sargs.band, "Settling band on f_e (Hz)")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--event-time", sargs.event_time, "Event time for settling (s); default first event");
  simulate_cmd->add_flag("--binary", sargs.binary, "Also write trace.bin");
  simulate_cmd->add_option("--prefix", sargs.prefix, "Prefix for output file names");

  AnalyzeArgs aargs;
  auto* analyze = app.add_subcommand("analyze", "Per-order analytical unit-vector distortion");
  analyze->add_option("--scenario", aargs.scenario, "Event-free scenario JSON")->check(CLI::ExistingFile);
  analyze->add_option("--freq", aargs.freq, "Input frequency (Hz) without a scenario")->check(CLI::PositiveNumber);
  analyze->add_option("--input-thd", aargs.input_thd, "Input THD (fraction) without a scenario")
      ->check(CLI::Range(0.0, 1.0));
  add_design_flags(analyze, aargs.design);

  SweepArgs wargs;
  auto* sweep = app.add_subcommand("sweep", "Unit-vector THD over input frequency and input THD");
  add_design_flags(sweep, wargs.design);
  sweep->add_option("--freqs", wargs.freqs, "Comma-separated input frequencies (Hz)");
  sweep->add_option("--thd-min", wargs.thd_min, "Lowest input THD (fraction)");
  sweep->add_option("--thd-max", wargs.thd_max, "Highest input THD (fraction)");
  sweep->add_option("--thd-step", wargs.thd_step, "Input THD step (fraction)");

  CompareArgs cargs;
  auto* compare = app.add_subcommand("compare", "Analytical vs simulated unit-vector THD table");
  compare->add_option("--fbw", cargs.fbws, "Comma-separated bandwidths; default runs both procedures");
  compare->add_option("--k", cargs.k, "k used with --fbw")->check(CLI::PositiveNumber);
  compare->add_option("--freqs", cargs.freqs, "Comma-separated input frequencies (Hz)");
  compare->add_option("--input-thd", cargs.input_thd, "Input THD (fraction)")->check(CLI::Range(0.0, 1.0));
  compare->add_option("--duration", cargs.duration, "Simulated time per point (s)")->check(CLI::PositiveNumber);
  compare->add_option("--ts", cargs.ts, "Sample period (s)")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*design) return cmd_design(dargs, common);
    if (*simulate_cmd) return cmd_simulate(sargs, common);
    if (*analyze) return cmd_analyze(aargs, common);
    if (*sweep) return cmd_sweep(wargs, common);
    if (*compare) return cmd_compare(cargs, common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
