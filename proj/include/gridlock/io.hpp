#pragma once
// File formats: scenario / design / metrics JSON, CSV tables and the binary
// trace container. Layouts are described in docs/formats.md.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridlock/design.hpp"
#include "gridlock/signal_model.hpp"
#include "gridlock/sim.hpp"

namespace gridlock::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct Scenario {
  std::string name;
  std::string description;
  std::optional<double> duration;  // s
  GridSignalSpec spec;
};

// Throws Error(Schema) with a JSON path ("$.events[1].kind: ...").
Scenario scenario_from_json(const json& j);
json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

struct DesignFile {
  std::string method;  // "mtsd", "hc-mtsd" or "manual"
  PllDesign design;
  double nominal_hz = 50.0;
  double v_m = 1.0;
};

json design_to_json(const DesignFile& d, const DesignConstraints* constraints = nullptr,
                    const DesignReport* report = nullptr);
DesignFile design_from_json(const json& j);
DesignFile load_design(const std::filesystem::path& path);

json metrics_to_json(const TransientMetrics& m);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

// Simple CSV table: header of column names (units folded into the names).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
std::string csv_number(double v);
void write_csv(const std::filesystem::path& path, const CsvTable& t);

CsvTable sweep_table(const DesignReport& r);
CsvTable trace_table(const SimTrace& tr);

struct BinaryTrace {
  double sample_period = 0.0;
  std::vector<std::string> names;
  std::vector<std::string> units;
  std::vector<std::vector<double>> channels;
};

void write_trace_binary(const std::filesystem::path& path, const SimTrace& tr);
BinaryTrace read_trace_binary(const std::filesystem::path& path);

}  // namespace gridlock::io
