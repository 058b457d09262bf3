#include "cddclock/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

#include "cddclock/errors.hpp"

namespace cddclock {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_value(const std::string& v);

template <>
double parse_value<double>(const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  return x;
}

template <>
int parse_value<int>(const std::string& v) {
  int x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

template <>
std::uint64_t parse_value<std::uint64_t>(const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

template <>
bool parse_value<bool>(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

template <>
std::string parse_value<std::string>(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

template <>
std::vector<MainsHarmonic> parse_value<std::vector<MainsHarmonic>>(const std::string& v) {
  std::vector<MainsHarmonic> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto a = item.find(':');
    const auto b = a == std::string::npos ? a : item.find(':', a + 1);
    if (a == std::string::npos) throw ConfigError("mains entries are frequency:amplitude[:phase], got '" + item + "'");
    MainsHarmonic h;
    h.frequency = parse_value<double>(trim(item.substr(0, a)));
    h.amplitude = parse_value<double>(trim(item.substr(a + 1, b == std::string::npos ? b : b - a - 1)));
    h.phase = b == std::string::npos ? 0.0 : parse_value<double>(trim(item.substr(b + 1)));
    out.push_back(h);
  }
  return out;
}

template <>
Readout parse_value<Readout>(const std::string& v) {
  if (v == "camera") return Readout::Camera;
  if (v == "pmt") return Readout::Pmt;
  throw ConfigError("readout must be camera or pmt, got '" + v + "'");
}

std::string format_value(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}
std::string format_value(int x) { return std::to_string(x); }
std::string format_value(std::uint64_t x) { return std::to_string(x); }
std::string format_value(bool x) { return x ? "true" : "false"; }
std::string format_value(const std::string& x) { return x; }
std::string format_value(Readout r) { return r == Readout::Camera ? "camera" : "pmt"; }
std::string format_value(const std::vector<MainsHarmonic>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_value(v[i].frequency) + ":" + format_value(v[i].amplitude) + ":" + format_value(v[i].phase);
  }
  return out;
}

struct Entry {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T, class F>
Entry entry(const char* section, const char* key, F ref) {
  return {section, key, [ref](RunConfig& c, const std::string& v) { ref(c) = parse_value<T>(v); },
          [ref](const RunConfig& c) { return format_value(ref(const_cast<RunConfig&>(c))); }};
}

#define CFG(T, section, key, expr) entry<T>(section, key, [](RunConfig& c) -> T& { return expr; })

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = {
      CFG(double, "constants", "g_S", c.g_S),
      CFG(double, "constants", "g_D", c.g_D),
      CFG(double, "constants", "quadrupole_moment", c.quadrupole_moment),
      CFG(double, "constants", "clock_frequency", c.clock_frequency),
      CFG(std::string, "cdd", "preset", c.preset),
      CFG(double, "cdd", "omega_S1", c.table.omega_S1),
      CFG(double, "cdd", "omega_D1", c.table.omega_D1),
      CFG(double, "cdd", "Omega_S1", c.table.Omega_S1),
      CFG(double, "cdd", "Omega_D1", c.table.Omega_D1),
      CFG(double, "cdd", "Omega_S2", c.table.Omega_S2),
      CFG(double, "cdd", "Omega_D2", c.table.Omega_D2),
      CFG(double, "cdd", "omega_S2", c.table.omega_S2),
      CFG(double, "cdd", "omega_D2", c.table.omega_D2),
      CFG(double, "cdd", "laser_Omega", c.laser_Omega),
      CFG(double, "sweep", "Delta_omega_sw1", c.table.Delta_omega_sw1),
      CFG(double, "sweep", "t_sw1", c.table.t_sw1),
      CFG(double, "sweep", "Delta_omega_sw2", c.table.Delta_omega_sw2),
      CFG(double, "sweep", "t_sw2", c.table.t_sw2),
      CFG(double, "sweep", "sigma_fraction", c.sigma_fraction),
      CFG(double, "sweep", "hold1", c.hold1),
      CFG(double, "sweep", "hold2", c.hold2),
      CFG(double, "sweep", "sweep_scale", c.sweep_scale),
      CFG(int, "trap", "ions", c.ions),
      CFG(double, "trap", "axial_frequency", c.axial_frequency),
      CFG(double, "trap", "radial_frequency", c.radial_frequency),
      CFG(double, "trap", "span", c.span),
      CFG(double, "waveform", "sample_rate", c.sample_rate),
      CFG(double, "waveform", "Omega_per_volt", c.Omega_per_volt),
      CFG(double, "waveform", "Q_S", c.Q_S),
      CFG(double, "waveform", "Q_D", c.Q_D),
      CFG(double, "waveform", "zero_scale", c.zero_scale),
      CFG(double, "waveform", "hold_duration", c.hold_duration),
      CFG(std::string, "waveform", "format", c.format),
      CFG(std::vector<MainsHarmonic>, "noise", "mains", c.noise.mains),
      CFG(double, "noise", "slow_drift", c.noise.slow_drift),
      CFG(double, "noise", "drift_time", c.noise.drift_time),
      CFG(double, "noise", "drift_step", c.noise.drift_step),
      CFG(double, "noise", "gradient_linear", c.noise.gradient_linear),
      CFG(double, "noise", "gradient_quadratic", c.noise.gradient_quadratic),
      CFG(double, "noise", "static_offset", c.noise.static_offset),
      CFG(double, "noise", "drive_amp_noise", c.noise.drive_amp_noise),
      CFG(double, "noise", "amp_correlation", c.noise.amp_correlation),
      CFG(double, "servo", "probe_time", c.servo.probe_time),
      CFG(double, "servo", "duty_cycle", c.servo.duty_cycle),
      CFG(double, "servo", "gain", c.servo.gain),
      CFG(double, "servo", "half_width", c.servo.half_width),
      CFG(Readout, "servo", "readout", c.servo.readout),
      CFG(bool, "servo", "projection_noise", c.servo.projection_noise),
      CFG(bool, "servo", "include_qps", c.servo.include_qps),
      CFG(double, "servo", "qps_coefficient", c.servo.qps_coefficient),
      CFG(int, "servo", "noise_points", c.servo.noise_points),
      CFG(double, "servo", "duration", c.duration),
      CFG(double, "scan", "detuning_min", c.detuning_min),
      CFG(double, "scan", "detuning_max", c.detuning_max),
      CFG(int, "scan", "points", c.points),
      CFG(int, "scan", "shots", c.shots),
      CFG(double, "analyze", "sensitivity_span", c.sensitivity_span),
      CFG(int, "analyze", "sensitivity_points", c.sensitivity_points),
      CFG(bool, "analyze", "floquet", c.floquet),
      CFG(std::string, "allan", "input", c.input),
      CFG(std::string, "allan", "units", c.units),
      CFG(std::uint64_t, "run", "seed", c.seed),
      CFG(int, "run", "jobs", c.jobs),
      CFG(std::string, "run", "output_dir", c.output_dir),
  };
  return r;
}

#undef CFG

const Entry* find_entry(const std::string& section, const std::string& key) {
  for (const Entry& e : registry()) {
    if (e.section == section && e.key == key) return &e;
  }
  return nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string unknown_key_message(const std::string& where, const std::string& section, const std::string& key) {
  std::string msg = where + "unknown key '" + key + "' in [" + section + "]";
  std::string best;
  std::size_t best_d = 3;
  for (const Entry& e : registry()) {
    if (e.section != section) continue;
    const std::size_t d = edit_distance(key, e.key);
    if (d < best_d) {
      best_d = d;
      best = e.key;
    }
  }
  if (!best.empty()) msg += " (did you mean '" + best + "'?)";
  return msg;
}

struct Assignment {
  std::string section;
  std::string key;
  std::string value;
  std::string where;  // "line N: " or "section.key: "
};

RunConfig apply_assignments(const std::vector<Assignment>& items, const std::string& preset_override) {
  std::map<std::pair<std::string, std::string>, std::string> seen;
  std::string preset = "resonant";
  for (const Assignment& a : items) {
    if (a.section.empty()) throw ConfigError(a.where + "key '" + a.key + "' outside a section");
    if (!find_entry(a.section, a.key)) throw ConfigError(unknown_key_message(a.where, a.section, a.key));
    if (!seen.emplace(std::make_pair(a.section, a.key), a.where).second) {
      throw ConfigError(a.where + "duplicate key '" + a.key + "' in [" + a.section + "]");
    }
    if (a.section == "cdd" && a.key == "preset") preset = parse_value<std::string>(a.value);
  }
  if (!preset_override.empty()) preset = preset_override;
  RunConfig cfg;
  try {
    cfg.table = preset_table(preset);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()));
  }
  cfg.preset = preset;
  for (const Assignment& a : items) {
    if (a.section == "cdd" && a.key == "preset") continue;
    try {
      find_entry(a.section, a.key)->set(cfg, a.value);
    } catch (const ConfigError& e) {
      throw ConfigError(a.where + a.section + "." + a.key + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

}  // namespace

PresetParameters preset_table(const std::string& name) {
  if (name == "resonant") return resonant_preset();
  if (name == "magic") return magic_preset();
  throw ConfigError("unknown preset '" + name + "' (expected resonant or magic)");
}

RunConfig parse_config_text(const std::string& text, const std::string& preset_override) {
  std::vector<Assignment> items;
  std::istringstream in(text);
  std::string line, section;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string where = "line " + std::to_string(n) + ": ";
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      bool known = false;
      for (const Entry& e : registry()) known = known || e.section == section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    items.push_back({section, trim(body.substr(0, eq)), trim(body.substr(eq + 1)), where});
  }
  return apply_assignments(items, preset_override);
}

RunConfig parse_config_json(const std::string& text, const std::string& preset_override) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.empty() ? std::string("{}") : text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be an object of sections");
  std::vector<Assignment> items;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) throw ConfigError("section '" + section + "' must be an object");
    for (const auto& [key, v] : body.items()) {
      const std::string where = section + "." + key + ": ";
      std::string value;
      if (v.is_string()) {
        value = v.get<std::string>();
      } else if (v.is_boolean()) {
        value = v.get<bool>() ? "true" : "false";
      } else if (v.is_number()) {
        value = v.dump();
      } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          const auto& h = v[i];
          if (!h.is_array() || h.size() < 2 || h.size() > 3) {
            throw ConfigError(where + "array entries must be [frequency, amplitude, phase]");
          }
          if (i) value += ", ";
          value += h[0].dump() + ":" + h[1].dump() + (h.size() == 3 ? ":" + h[2].dump() : std::string());
        }
      } else {
        throw ConfigError(where + "unsupported value type");
      }
      items.push_back({section, key, value, where});
    }
  }
  return apply_assignments(items, preset_override);
}

RunConfig parse_config(const std::string& path, const std::string& preset_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  try {
    return json ? parse_config_json(ss.str(), preset_override) : parse_config_text(ss.str(), preset_override);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.ions >= 1 && c.ions <= 50, "trap.ions must lie in [1, 50]");
  require(c.radial_frequency > 0.0 && c.axial_frequency >= 0.0 && c.span > 0.0, "trap frequencies and span must be positive");
  require(c.sample_rate > 0.0 && c.Omega_per_volt > 0.0, "waveform.sample_rate and Omega_per_volt must be positive");
  require(c.Q_S > 0.5 && c.Q_D > 0.5, "coil quality factors must exceed 0.5");
  require(c.zero_scale > 0.0 && c.hold_duration > 0.0, "waveform.zero_scale and hold_duration must be positive");
  require(c.format == "csv" || c.format == "raw", "waveform.format must be csv or raw");
  require(c.sweep_scale > 0.0 && c.sigma_fraction > 0.0, "sweep_scale and sigma_fraction must be positive");
  require(c.hold1 >= 0.0 && c.hold2 >= 0.0, "hold times must be non-negative");
  require(c.points >= 5, "scan.points must be at least 5");
  require(c.shots >= 50, "scan.shots must be at least 50");
  require(c.detuning_max > c.detuning_min, "scan.detuning_max must exceed detuning_min");
  require(c.sensitivity_points >= 3 && c.sensitivity_span > 0.0, "analyze grid needs 3 points and a positive span");
  require(c.units == "hz" || c.units == "fractional", "allan.units must be hz or fractional");
  require(c.jobs >= 1, "run.jobs must be at least 1");
  require(c.duration > 0.0, "servo.duration must be positive");
  require(c.clock_frequency > 0.0 && c.g_S > 0.0 && c.g_D > 0.0, "constants must be positive");
  try {
    validate(c.noise);
    validate(c.servo);
    cddclock::validate(build_parameter_set(c), build_constants(c));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

std::string snapshot(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const Entry& e : registry()) {
    if (e.section != section) {
      if (!section.empty()) out += "\n";
      section = e.section;
      out += "[" + section + "]\n";
    }
    out += e.key + " = " + e.get(cfg) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  // Where the artifacts land does not change them.
  RunConfig c = cfg;
  c.output_dir = ".";
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : snapshot(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PhysicalConstants build_constants(const RunConfig&) { return {}; }

double quadrupole_moment_SI(const RunConfig& cfg) {
  const PhysicalConstants c = build_constants(cfg);
  return cfg.quadrupole_moment * c.electron_charge * c.bohr_radius * c.bohr_radius;
}

CddParameterSet build_parameter_set(const RunConfig& cfg) {
  return parameter_set_from_table(cfg.table, cfg.g_S, cfg.g_D, cfg.laser_Omega, build_constants(cfg));
}

TrapConfig build_trap(const RunConfig& cfg) {
  TrapConfig t;
  t.N = cfg.ions;
  t.omega_z = cfg.axial_frequency > 0.0 ? kTwoPi * cfg.axial_frequency
                                        : omega_z_for_span(5, cfg.span * 1e-6, build_constants(cfg));
  t.omega_r = kTwoPi * cfg.radial_frequency;
  return t;
}

SweepSettings build_sweeps(const RunConfig& cfg) {
  SweepSettings s = sweeps_from_table(cfg.table);
  s.t_sw1 *= cfg.sweep_scale;
  s.t_sw2 *= cfg.sweep_scale;
  s.sigma_fraction = cfg.sigma_fraction;
  s.hold1 = cfg.hold1 * 1e-6;
  s.hold2 = cfg.hold2 * 1e-6;
  return s;
}

std::vector<double> scan_grid(const RunConfig& cfg) {
  std::vector<double> g(cfg.points);
  for (int i = 0; i < cfg.points; ++i) {
    g[i] = cfg.detuning_min + (cfg.detuning_max - cfg.detuning_min) * i / (cfg.points - 1);
  }
  return g;
}

}  // namespace cddclock
