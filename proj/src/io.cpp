#include "gridlock/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "gridlock/error.hpp"

namespace gridlock::io {
namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::Schema, path + ": " + msg);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) schema_error(path + "." + key, "unknown key");
  }
}

double number_at(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) schema_error(path + "." + key, "missing required number");
  const json& v = j.at(key);
  if (!v.is_number()) schema_error(path + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(path + "." + key, "must be finite");
  return d;
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? number_at(j, key, path) : fallback;
}

std::string string_or(const json& j, const char* key, const std::string& path, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) schema_error(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

void check_version(const json& j, const std::string& path, bool required) {
  if (!j.contains("schema_version")) {
    if (required) schema_error(path + ".schema_version", "missing");
    return;
  }
  const json& v = j.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    schema_error(path + ".schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }
}

EventKind kind_from(const std::string& s, const std::string& path) {
  if (s == "phase_jump") return EventKind::PhaseJump;
  if (s == "frequency_step") return EventKind::FrequencyStep;
  if (s == "amplitude_step") return EventKind::AmplitudeStep;
  if (s == "dc_step") return EventKind::DcStep;
  schema_error(path, "unknown event kind '" + s + "'");
}

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::PhaseJump: return "phase_jump";
    case EventKind::FrequencyStep: return "frequency_step";
    case EventKind::AmplitudeStep: return "amplitude_step";
    case EventKind::DcStep: return "dc_step";
  }
  return "?";
}

void put_u16(std::ostream& os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint64_t get_uint(std::istream& is, int bytes) {
  unsigned char b[8] = {};
  if (!is.read(reinterpret_cast<char*>(b), bytes)) throw Error(ErrorCode::Schema, "truncated trace file");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put_u16(os, static_cast<std::uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = static_cast<std::size_t>(get_uint(is, 2));
  std::string s(n, '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(n))) throw Error(ErrorCode::Schema, "truncated trace file");
  return s;
}

constexpr char kMagic[8] = {'G', 'L', 'T', 'R', 'A', 'C', 'E', '1'};

}  // namespace

Scenario scenario_from_json(const json& j) {
  const std::string root = "$";
  require_object(j, root);
  reject_unknown(j, root, {"schema_version", "name", "description", "duration_s", "fundamental", "harmonics",
                           "harmonic_profile", "dc_offset", "events"});
  check_version(j, root, false);

  Scenario s;
  s.name = string_or(j, "name", root, "");
  s.description = string_or(j, "description", root, "");
  if (j.contains("duration_s")) {
    s.duration = number_at(j, "duration_s", root);
    if (!(*s.duration > 0.0)) schema_error("$.duration_s", "must be positive");
  }

  if (!j.contains("fundamental")) schema_error("$.fundamental", "missing required object");
  const json& f = j.at("fundamental");
  require_object(f, "$.fundamental");
  reject_unknown(f, "$.fundamental", {"amplitude", "frequency_hz", "phase_rad"});
  s.spec.fundamental_amplitude = number_or(f, "amplitude", "$.fundamental", 1.0);
  s.spec.fundamental_frequency = number_at(f, "frequency_hz", "$.fundamental");
  s.spec.fundamental_phase = number_or(f, "phase_rad", "$.fundamental", 0.0);
  if (!(s.spec.fundamental_frequency > 0.0)) schema_error("$.fundamental.frequency_hz", "must be positive");
  if (s.spec.fundamental_amplitude < 0.0) schema_error("$.fundamental.amplitude", "must be non-negative");

  if (j.contains("harmonics")) {
    const json& hs = j.at("harmonics");
    if (!hs.is_array()) schema_error("$.harmonics", "expected an array");
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const std::string p = "$.harmonics[" + std::to_string(i) + "]";
      const json& h = hs[i];
      require_object(h, p);
      reject_unknown(h, p, {"order", "amplitude", "phase_rad"});
      if (!h.contains("order") || !h.at("order").is_number_integer()) schema_error(p + ".order", "expected an integer");
      HarmonicComponent c;
      c.order = h.at("order").get<int>();
      c.amplitude = number_at(h, "amplitude", p);
      c.phase = number_or(h, "phase_rad", p, 0.0);
      if (c.order < 2) schema_error(p + ".order", "must be >= 2");
      if (c.amplitude < 0.0) schema_error(p + ".amplitude", "must be non-negative");
      s.spec.harmonics.push_back(c);
    }
  }

  if (j.contains("harmonic_profile")) {
    const std::string p = "$.harmonic_profile";
    const json& hp = j.at("harmonic_profile");
    require_object(hp, p);
    reject_unknown(hp, p, {"thd", "orders"});
    const double thd = number_at(hp, "thd", p);
    if (thd < 0.0) schema_error(p + ".thd", "must be non-negative");
    std::vector<int> orders = kDefaultHarmonicOrders;
    if (hp.contains("orders")) {
      const json& o = hp.at("orders");
      if (!o.is_array() || o.empty()) schema_error(p + ".orders", "expected a non-empty integer array");
      orders.clear();
      for (std::size_t i = 0; i < o.size(); ++i) {
        if (!o[i].is_number_integer() || o[i].get<int>() < 2) {
          schema_error(p + ".orders[" + std::to_string(i) + "]", "expected an integer >= 2");
        }
        orders.push_back(o[i].get<int>());
      }
    }
    for (const auto& c : harmonic_profile(thd, orders)) s.spec.harmonics.push_back(c);
  }

  s.spec.dc_offset = number_or(j, "dc_offset", root, 0.0);

  if (j.contains("events")) {
    const json& es = j.at("events");
    if (!es.is_array()) schema_error("$.events", "expected an array");
    double prev = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
      const std::string p = "$.events[" + std::to_string(i) + "]";
      const json& e = es[i];
      require_object(e, p);
      reject_unknown(e, p, {"time_s", "kind", "value"});
      TimedEvent ev;
      ev.time = number_at(e, "time_s", p);
      if (!e.contains("kind") || !e.at("kind").is_string()) schema_error(p + ".kind", "expected a string");
      ev.kind = kind_from(e.at("kind").get<std::string>(), p + ".kind");
      ev.value = number_at(e, "value", p);
      if (ev.time < 0.0) schema_error(p + ".time_s", "must be non-negative");
      if (ev.time < prev) schema_error(p + ".time_s", "events must be sorted by time");
      if (ev.kind == EventKind::FrequencyStep && !(ev.value > 0.0)) schema_error(p + ".value", "frequency must be positive");
      if (ev.kind == EventKind::AmplitudeStep && ev.value < 0.0) schema_error(p + ".value", "amplitude must be non-negative");
      prev = ev.time;
      s.spec.events.push_back(ev);
    }
  }
  try {
    s.spec.validate();
  } catch (const Error& e) {
    schema_error(root, e.what());
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  if (!s.name.empty()) j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  if (s.duration) j["duration_s"] = *s.duration;
  j["fundamental"] = {{"amplitude", s.spec.fundamental_amplitude},
                      {"frequency_hz", s.spec.fundamental_frequency},
                      {"phase_rad", s.spec.fundamental_phase}};
  j["harmonics"] = json::array();
  for (const auto& h : s.spec.harmonics) {
    j["harmonics"].push_back({{"order", h.order}, {"amplitude", h.amplitude}, {"phase_rad", h.phase}});
  }
  j["dc_offset"] = s.spec.dc_offset;
  j["events"] = json::array();
  for (const auto& e : s.spec.events) {
    j["events"].push_back({{"time_s", e.time}, {"kind", kind_name(e.kind)}, {"value", e.value}});
  }
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_json(path)); }

json design_to_json(const DesignFile& d, const DesignConstraints* c, const DesignReport* r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "pll_design";
  j["method"] = d.method;
  j["k"] = d.design.k;
  j["f_bw_hz"] = d.design.f_bw;
  j["kp"] = d.design.pi.kp;
  j["ki"] = d.design.pi.ki;
  j["sample_period_s"] = d.design.pi.sample_period;
  j["nominal_hz"] = d.nominal_hz;
  j["v_m"] = d.v_m;
  j["t_s_hgi_ms"] = 1e3 * d.design.t_s_hgi;
  j["t_s_srf_ms"] = 1e3 * d.design.t_s_srf;
  j["t_sd_ms"] = 1e3 * d.design.t_sd;
  if (c) {
    j["constraints"] = {{"delta_f", c->delta_f},
                        {"input_thd", c->input_thd},
                        {"uthd_limit", c->uthd_limit},
                        {"f_bw_range_hz", {c->f_bw_min, c->f_bw_max}},
                        {"f_bw_step_hz", c->f_bw_step},
                        {"k_range", {c->k_min, c->k_max}},
                        {"k_step", c->k_step},
                        {"frequency_step_hz", c->freq_step_hz},
                        {"harmonic_orders", c->harmonic_orders},
                        {"settle_tolerance", c->settle_tolerance}};
  }
  if (r) {
    json rep;
    rep["feasible_bandwidths"] = r->feasible_count;
    rep["swept_bandwidths"] = r->sweep.size();
    rep["monotone_in_bandwidth"] = r->monotone_in_bandwidth;
    rep["frequencies_hz"] = r->frequencies;
    json grid = json::array();
    for (const auto& row : r->thd) grid.push_back(row);
    rep["predicted_uthd_percent"] = grid;
    j["report"] = rep;
  }
  return j;
}

DesignFile design_from_json(const json& j) {
  const std::string root = "$";
  require_object(j, root);
  check_version(j, root, true);
  if (string_or(j, "kind", root, "pll_design") != "pll_design") schema_error("$.kind", "expected 'pll_design'");
  DesignFile d;
  d.method = string_or(j, "method", root, "manual");
  d.nominal_hz = number_or(j, "nominal_hz", root, 50.0);
  d.v_m = number_or(j, "v_m", root, 1.0);
  const double k = number_at(j, "k", root);
  const double f_bw = number_at(j, "f_bw_hz", root);
  const double ts = number_or(j, "sample_period_s", root, 50e-6);
  if (!(k > 0.0)) schema_error("$.k", "must be positive");
  if (!(f_bw > 0.0)) schema_error("$.f_bw_hz", "must be positive");
  if (!(ts > 0.0)) schema_error("$.sample_period_s", "must be positive");
  if (!(d.nominal_hz > 0.0)) schema_error("$.nominal_hz", "must be positive");
  if (!(d.v_m > 0.0)) schema_error("$.v_m", "must be positive");
  d.design = make_design(k, f_bw, d.v_m, ts, d.nominal_hz);
  if (j.contains("kp")) d.design.pi.kp = number_at(j, "kp", root);
  if (j.contains("ki")) d.design.pi.ki = number_at(j, "ki", root);
  try {
    d.design.pi.validate();
  } catch (const Error& e) {
    schema_error("$.kp", e.what());
  }
  return d;
}

DesignFile load_design(const std::filesystem::path& path) { return design_from_json(read_json(path)); }

json metrics_to_json(const TransientMetrics& m) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"settle_time_ms", num(1e3 * m.settle_time)},
          {"settled", m.settled},
          {"peak_freq_excursion_hz", num(m.peak_freq_excursion)},
          {"final_frequency_hz", num(m.final_frequency)},
          {"steady_thd_percent", num(m.steady_thd)},
          {"freq_ripple_peak_hz", num(m.freq_ripple_peak)},
          {"fundamental_ripple_hz", num(m.fundamental_ripple)},
          {"window_s", num(m.window_seconds)}};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Schema, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

CsvTable sweep_table(const DesignReport& r) {
  CsvTable t;
  t.header = {"f_bw_hz", "k", "t_sd_ms", "feasible"};
  for (const auto& row : r.sweep) {
    t.rows.push_back({csv_number(row.f_bw), csv_number(row.k), csv_number(1e3 * row.t_sd),
                      row.feasible ? "true" : "false"});
  }
  return t;
}

CsvTable trace_table(const SimTrace& tr) {
  const auto ch = tr.channels();
  CsvTable t;
  for (const auto& c : ch) t.header.push_back(std::string(c.name) + " [" + c.unit + "]");
  t.rows.reserve(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(ch.size());
    for (const auto& c : ch) row.push_back(csv_number((*c.data)[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_trace_binary(const std::filesystem::path& path, const SimTrace& tr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  const auto ch = tr.channels();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(kSchemaVersion));
  put_u32(out, static_cast<std::uint32_t>(ch.size()));
  put_u64(out, tr.size());
  put_u64(out, std::bit_cast<std::uint64_t>(tr.sample_period));
  for (const auto& c : ch) {
    put_string(out, c.name);
    put_string(out, c.unit);
  }
  for (const auto& c : ch) {
    for (double v : *c.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
}

BinaryTrace read_trace_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Schema, "cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorCode::Schema, "not a trace file");
  if (get_uint(in, 4) != static_cast<std::uint64_t>(kSchemaVersion)) {
    throw Error(ErrorCode::Schema, "unsupported trace version");
  }
  const auto nch = static_cast<std::size_t>(get_uint(in, 4));
  const auto n = static_cast<std::size_t>(get_uint(in, 8));
  BinaryTrace t;
  t.sample_period = std::bit_cast<double>(get_uint(in, 8));
  for (std::size_t c = 0; c < nch; ++c) {
    t.names.push_back(get_string(in));
    t.units.push_back(get_string(in));
  }
  t.channels.assign(nch, std::vector<double>(n));
  for (auto& ch : t.channels) {
    for (auto& v : ch) v = std::bit_cast<double>(get_uint(in, 8));
  }
  return t;
}

}  // namespace gridlock::io
