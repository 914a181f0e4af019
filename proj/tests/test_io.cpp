#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "gridlock/error.hpp"
#include "gridlock/io.hpp"

using namespace gridlock;
using namespace gridlock::io;
using Catch::Matchers::StartsWith;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gridlock_test_io";
  fs::create_directories(dir);
  return dir / name;
}

json minimal() {
  return json::parse(R"({"schema_version": 1, "fundamental": {"frequency_hz": 50.0}})");
}

std::string schema_message(const json& j) {
  try {
    scenario_from_json(j);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
    return e.what();
  }
  FAIL("expected a schema error");
  return {};
}

}  // namespace

TEST_CASE("scenario round trip", "[io]") {
  Scenario s;
  s.name = "mix";
  s.description = "all fields";
  s.duration = 0.8;
  s.spec.fundamental_amplitude = 0.9;
  s.spec.fundamental_frequency = 47.5;
  s.spec.fundamental_phase = 0.25;
  s.spec.harmonics = {{5, 0.04, 0.1}, {7, 0.02, -0.3}};
  s.spec.dc_offset = 0.05;
  s.spec.events = {{0.1, EventKind::PhaseJump, 0.5},
                   {0.2, EventKind::FrequencyStep, 51.0},
                   {0.3, EventKind::AmplitudeStep, 0.7},
                   {0.4, EventKind::DcStep, 0.0}};
  const json j = scenario_to_json(s);
  CHECK(j.at("schema_version") == kSchemaVersion);
  const Scenario b = scenario_from_json(j);
  CHECK(b.name == s.name);
  CHECK(b.description == s.description);
  CHECK(b.duration == s.duration);
  CHECK(b.spec.fundamental_amplitude == 0.9);
  CHECK(b.spec.fundamental_frequency == 47.5);
  CHECK(b.spec.fundamental_phase == 0.25);
  REQUIRE(b.spec.harmonics.size() == 2);
  CHECK(b.spec.harmonics[1].order == 7);
  CHECK(b.spec.harmonics[1].phase == -0.3);
  REQUIRE(b.spec.events.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(b.spec.events[i].kind == s.spec.events[i].kind);
    CHECK(b.spec.events[i].value == s.spec.events[i].value);
  }
  CHECK(scenario_to_json(b) == j);
}

TEST_CASE("scenario defaults and harmonic profile", "[io]") {
  const Scenario m = scenario_from_json(minimal());
  CHECK(m.spec.fundamental_amplitude == 1.0);
  CHECK(m.spec.harmonics.empty());
  CHECK_FALSE(m.duration.has_value());

  json j = minimal();
  j["harmonic_profile"] = {{"thd", 0.05}};
  const Scenario p = scenario_from_json(j);
  REQUIRE(p.spec.harmonics.size() == 4);
  CHECK(p.spec.harmonics[0].order == 3);
  j["harmonic_profile"] = {{"thd", 0.03}, {"orders", {5, 7}}};
  CHECK(scenario_from_json(j).spec.harmonics.size() == 2);
}

TEST_CASE("schema errors carry a JSON path", "[io]") {
  json j = minimal();
  j["events"] = json::array({{{"time_s", 0.1}, {"kind", "x"}, {"value", 1.0}}});
  CHECK(schema_message(j) == "$.events[0].kind: unknown event kind 'x'");

  j = minimal();
  j["bogus"] = 1;
  CHECK(schema_message(j) == "$.bogus: unknown key");

  j = minimal();
  j["fundamental"].erase("frequency_hz");
  CHECK_THAT(schema_message(j), StartsWith("$.fundamental.frequency_hz:"));

  j = minimal();
  j["harmonics"] = json::array({{{"order", 1}, {"amplitude", 0.1}}});
  CHECK_THAT(schema_message(j), StartsWith("$.harmonics[0].order:"));

  j = minimal();
  j["schema_version"] = 2;
  CHECK_THAT(schema_message(j), StartsWith("$.schema_version:"));

  j = minimal();
  j["events"] = json::array({{{"time_s", 0.3}, {"kind", "phase_jump"}, {"value", 1.0}},
                             {{"time_s", 0.1}, {"kind", "phase_jump"}, {"value", 1.0}}});
  CHECK_THAT(schema_message(j), StartsWith("$.events[1].time_s:"));

  j = minimal();
  j["dc_offset"] = "high";
  CHECK_THAT(schema_message(j), StartsWith("$.dc_offset:"));
}

TEST_CASE("design file round trip", "[io]") {
  DesignFile d{"mtsd", make_design(1.56, 52.5), 50.0, 1.0};
  d.design.pi.ki = 1234.5;
  const json j = design_to_json(d);
  CHECK(j.at("schema_version") == kSchemaVersion);
  CHECK(j.at("kind") == "pll_design");
  const DesignFile b = design_from_json(j);
  CHECK(b.method == "mtsd");
  CHECK(b.design.k == 1.56);
  CHECK(b.design.f_bw == 52.5);
  CHECK(b.design.pi.kp == d.design.pi.kp);
  CHECK(b.design.pi.ki == 1234.5);
  CHECK(b.design.t_sd == d.design.t_sd);

  json nov = j;
  nov.erase("schema_version");
  CHECK_THROWS_AS(design_from_json(nov), Error);
  json wrong = j;
  wrong["kind"] = "scenario";
  CHECK_THROWS_AS(design_from_json(wrong), Error);

  write_json(scratch("d.json"), j);
  CHECK(load_design(scratch("d.json")).design.pi.ki == 1234.5);
}

TEST_CASE("json file errors map to schema errors", "[io]") {
  std::ofstream(scratch("bad.json")) << "{ not json";
  try {
    read_json(scratch("bad.json"));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
  }
  CHECK_THROWS_AS(read_json(scratch("missing.json")), Error);
}

TEST_CASE("csv formatting", "[io]") {
  CHECK(csv_number(0.1) == "0.1");
  CHECK(csv_number(52.5) == "52.5");
  CHECK(csv_number(std::nan("")) == "nan");
  CsvTable t{{"a", "b [s]"}, {{"1", "2"}, {"3", "4"}}};
  write_csv(scratch("t.csv"), t);
  std::ifstream in(scratch("t.csv"));
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "a,b [s]");
  CHECK(l2 == "1,2");
  CHECK(l3 == "3,4");
}

TEST_CASE("sweep and trace tables", "[io]") {
  const DesignReport r = mtsd_design(DesignConstraints{});
  const CsvTable s = sweep_table(r);
  CHECK(s.header == std::vector<std::string>{"f_bw_hz", "k", "t_sd_ms", "feasible"});
  CHECK(s.rows.size() == r.sweep.size());

  SimOptions o;
  o.duration = 0.01;
  const SimTrace tr = simulate(GridSignalSpec{}, r.design, o);
  const CsvTable t = trace_table(tr);
  CHECK(t.header.front() == "t [s]");
  CHECK(t.header.size() == 10);
  CHECK(t.rows.size() == tr.size());
}

TEST_CASE("binary trace round trip", "[io]") {
  GridSignalSpec s;
  s.harmonics = harmonic_profile(0.05);
  SimOptions o;
  o.duration = 0.05;
  const SimTrace tr = simulate(s, make_design(1.56, 29), o);
  write_trace_binary(scratch("t.bin"), tr);
  const BinaryTrace b = read_trace_binary(scratch("t.bin"));
  CHECK(b.sample_period == tr.sample_period);
  const auto ch = tr.channels();
  REQUIRE(b.channels.size() == ch.size());
  for (std::size_t i = 0; i < ch.size(); ++i) {
    CHECK(b.names[i] == ch[i].name);
    CHECK(b.units[i] == ch[i].unit);
    CHECK(b.channels[i] == *ch[i].data);
  }
  // Header: magic, version, channel count, sample count, Ts; all little-endian.
  std::ifstream in(scratch("t.bin"), std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "GLTRACE1");
  unsigned char v[4];
  in.read(reinterpret_cast<char*>(v), 4);
  CHECK((v[0] | v[1] << 8 | v[2] << 16 | v[3] << 24) == 1);

  std::ofstream(scratch("junk.bin")) << "NOTATRACE";
  CHECK_THROWS_AS(read_trace_binary(scratch("junk.bin")), Error);
  const auto size = fs::file_size(scratch("t.bin"));
  fs::copy_file(scratch("t.bin"), scratch("cut.bin"), fs::copy_options::overwrite_existing);
  fs::resize_file(scratch("cut.bin"), size - 9);
  CHECK_THROWS_AS(read_trace_binary(scratch("cut.bin")), Error);
}

TEST_CASE("shipped scenarios parse", "[io]") {
  int count = 0;
  for (const auto& e : fs::directory_iterator(GRIDLOCK_SCENARIOS)) {
    if (e.path().extension() != ".json") continue;
    const Scenario s = load_scenario(e.path());
    CHECK(s.name == e.path().stem().string());
    CHECK_NOTHROW(s.spec.validate());
    ++count;
  }
  CHECK(count == 5);
}
