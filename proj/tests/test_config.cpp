#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cddclock/artifacts.hpp"
#include "cddclock/config.hpp"
#include "cddclock/errors.hpp"
#include "doctest.h"

using namespace cddclock;

namespace {

std::string tmp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cddclock_test_config";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("presets") {
  const RunConfig r = parse_config_text("[cdd]\npreset = resonant\n");
  CHECK(r.table.Omega_D1 == 115446.0);
  CHECK(r.table.omega_S2 == 46915.0);
  const RunConfig m = parse_config_text("", "magic");
  CHECK(m.preset == "magic");
  CHECK(m.table.Omega_D1 == magic_preset().Omega_D1);
  // An explicit key overrides the preset value, wherever it appears.
  const RunConfig o = parse_config_text("[cdd]\nlaser_Omega = 3\nOmega_S1 = 1001\npreset = magic\n");
  CHECK(o.table.Omega_S1 == 1001.0);
  CHECK(o.table.omega_D1 == magic_preset().omega_D1);
  CHECK(o.laser_Omega == 3.0);
  CHECK(error_of("[cdd]\npreset = nonsense\n").find("nonsense") != std::string::npos);
}

TEST_CASE("empty file gives defaults") {
  const RunConfig c = parse_config_text("");
  const RunConfig d;
  CHECK(snapshot(c) == snapshot(d));
  CHECK(c.ions == 5);
  CHECK(c.seed == 1);
  CHECK(parse_config_text("# only a comment\n\n").table.omega_D2 == resonant_preset().omega_D2);
}

TEST_CASE("typos are rejected with the key and line") {
  const std::string e = error_of("[cdd]\n\nOmgea_S1 = 1000\n");
  CHECK(e.find("Omgea_S1") != std::string::npos);
  CHECK(e.find("line 3") != std::string::npos);
  CHECK(e.find("Omega_S1") != std::string::npos);
  CHECK(error_of("[cdd]\nOmega_S1 = 1000\nOmega_S1 = 1000\n").find("duplicate") != std::string::npos);
  CHECK(error_of("[nosuch]\n").find("unknown section") != std::string::npos);
  CHECK(error_of("ions = 3\n").find("outside a section") != std::string::npos);
  CHECK(error_of("[trap]\nions = three\n").find("line 2") != std::string::npos);
  CHECK(error_of("[trap]\nions 3\n").find("key = value") != std::string::npos);
  CHECK(error_of("[trap]\nions = 0\n").find("ions") != std::string::npos);
  CHECK(error_of("[scan]\nshots = 10\n").find("shots") != std::string::npos);
  CHECK(error_of("[servo]\nduty_cycle = 2\n").find("duty_cycle") != std::string::npos);
}

TEST_CASE("snapshot round trip and hash") {
  RunConfig c = parse_config_text(
      "[noise]\nmains = 50:3:0.5, 150:1\nstatic_offset = 12.5\n[servo]\nreadout = pmt\n[run]\nseed = 42\n");
  CHECK(c.noise.mains.size() == 2);
  CHECK(c.noise.mains[1].phase == 0.0);
  CHECK(c.servo.readout == Readout::Pmt);
  const RunConfig back = parse_config_text(snapshot(c));
  CHECK(snapshot(back) == snapshot(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  c.seed = 43;
  CHECK(config_hash(c) != config_hash(back));
  RunConfig moved = back;
  moved.output_dir = "/elsewhere";
  CHECK(config_hash(moved) == config_hash(back));
  // Mains may be switched off entirely.
  CHECK(parse_config_text("[noise]\nmains =\n").noise.mains.empty());
}

TEST_CASE("json mirror") {
  const RunConfig j = parse_config_json(R"({"cdd": {"preset": "magic", "laser_Omega": 7},
      "noise": {"mains": [[50, 2, 0], [100, 1]]}, "analyze": {"floquet": true}})");
  CHECK(j.preset == "magic");
  CHECK(j.laser_Omega == 7.0);
  CHECK(j.noise.mains.size() == 2);
  CHECK(j.floquet);
  const RunConfig ini = parse_config_text(
      "[cdd]\npreset = magic\nlaser_Omega = 7\n[noise]\nmains = 50:2:0, 100:1\n[analyze]\nfloquet = true\n");
  CHECK(snapshot(j) == snapshot(ini));
  CHECK_THROWS_AS(parse_config_json(R"({"cdd": {"Omgea_S1": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("{"), ConfigError);
  CHECK(parse_config_json("").ions == 5);
}

TEST_CASE("files") {
  const std::string ini = tmp_path("a.ini");
  write_text(ini, "[trap]\nions = 3\n");
  CHECK(parse_config(ini).ions == 3);
  const std::string js = tmp_path("a.json");
  write_text(js, R"({"trap": {"ions": 4}})");
  CHECK(parse_config(js).ions == 4);
  CHECK_THROWS_AS(parse_config(tmp_path("missing.ini")), ConfigError);
}

TEST_CASE("derived objects") {
  const RunConfig c;
  const CddParameterSet set = build_parameter_set(c);
  CHECK(std::abs(first_stage_splitting(set.S) - 46915.0) < 1.0);
  const TrapConfig t = build_trap(c);
  CHECK(t.N == 5);
  CHECK(t.omega_z == doctest::Approx(default_trap(5).omega_z));
  const SweepSettings s = build_sweeps(c);
  CHECK(s.t_sw1 == doctest::Approx(c.table.t_sw1 * 1e-6));
  CHECK(s.hold1 == doctest::Approx(100e-6));
  const std::vector<double> g = scan_grid(c);
  CHECK(g.size() == 201);
  CHECK(g.front() == -20.0);
  CHECK(g.back() == 80.0);
  CHECK(quadrupole_moment_SI(c) == doctest::Approx(1.83 * 1.602176634e-19 * 5.29177210903e-11 * 5.29177210903e-11));
}

TEST_CASE("artifact files") {
  const std::string path = tmp_path("out.csv");
  {
    CsvWriter w(path, {"scan", "0123456789abcdef", {"note one"}}, {"a", "b"});
    w.cell(0.1).cell(3).end_row();
  }
  {
    CsvWriter bad(tmp_path("bad.csv"), {"scan", "0", {}}, {"a", "b"});
    CHECK_THROWS(bad.cell(1.0).cell(2.0).cell(3.0));
    CHECK_THROWS(CsvWriter(tmp_path("short.csv"), {"scan", "0", {}}, {"a", "b"}).cell(1.0).end_row());
  }
  std::ifstream in(path);
  std::string l1, l2, l3, l4, l5;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  std::getline(in, l4);
  std::getline(in, l5);
  CHECK(l1.rfind("# cddclock ", 0) == 0);
  CHECK(l2 == "# subcommand: scan");
  CHECK(l3 == "# config_hash: 0123456789abcdef");
  CHECK(l4 == "# note one");
  CHECK(l5 == "a,b");
  const CsvTable t = read_csv(path);
  CHECK(t.columns.size() == 2);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == 0.1);
  CHECK(format_number(0.1) == "0.1");
}
