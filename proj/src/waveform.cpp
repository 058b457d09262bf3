#include "cddclock/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cddclock/errors.hpp"

namespace cddclock {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// 2*pi times the fractional part of a cycle count; keeps phases accurate for
// long segments at MHz carriers.
double cycles_to_phase(double cycles) { return kTwoPi * (cycles - std::floor(cycles)); }

double wrap(double phase) {
  const double w = std::fmod(phase, kTwoPi);
  return w < 0.0 ? w + kTwoPi : w;
}

double wrap_signed(double phase) { return std::remainder(phase, kTwoPi); }

int rank(SegmentKind k) { return static_cast<int>(k); }

bool has_slow_tone(SegmentKind k) { return k == SegmentKind::Sweep2 || k == SegmentKind::Hold2; }

bool is_sweep(SegmentKind k) { return k == SegmentKind::Sweep1 || k == SegmentKind::Sweep2; }

double gaussian(double t, double center, double sigma) {
  const double x = (t - center) / sigma;
  return std::exp(-x * x);
}

double chirp_cycles(double f_init, double f_end, double t_sw, double t) {
  return f_init * t + (f_end - f_init) / (2.0 * t_sw) * t * t;
}

}  // namespace

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Sweep1: return "sweep1";
    case SegmentKind::Hold1: return "hold1";
    case SegmentKind::Sweep2: return "sweep2";
    case SegmentKind::Hold2: return "hold2";
  }
  return "unknown";
}

void validate(const SegmentSpec& s) {
  if (!(s.duration > 0.0)) throw DomainError(to_string(s.kind) + ": duration must be positive");
  if (is_sweep(s.kind)) {
    if (!(s.sigma > 0.0)) throw DomainError(to_string(s.kind) + ": sigma must be positive");
    if (!(s.t_sw > 0.0)) throw DomainError(to_string(s.kind) + ": t_sw must be positive");
    const double target = s.kind == SegmentKind::Sweep1 ? s.omega1 : s.omega2;
    if (std::abs(target - s.omega_init) >= 0.2 * std::abs(s.omega1)) {
      throw DomainError(to_string(s.kind) + ": sweep range must stay below 0.2 * omega1");
    }
  }
}

double fast_phase(const SegmentSpec& s, double t) {
  if (s.kind == SegmentKind::Sweep1) return cycles_to_phase(chirp_cycles(s.omega_init, s.omega1, s.t_sw, t));
  return cycles_to_phase(s.omega1 * t) + s.phi1;
}

double slow_phase(const SegmentSpec& s, double t) {
  if (s.kind == SegmentKind::Sweep2) return cycles_to_phase(chirp_cycles(s.omega_init, s.omega2, s.t_sw, t)) + s.phi2;
  if (s.kind == SegmentKind::Hold2) return cycles_to_phase(s.omega2 * t) + s.phi2;
  return std::numeric_limits<double>::quiet_NaN();
}

double sweep_frequency(const SegmentSpec& s, double t) {
  switch (s.kind) {
    case SegmentKind::Sweep1: return s.omega_init + (s.omega1 - s.omega_init) * t / s.t_sw;
    case SegmentKind::Sweep2: return s.omega_init + (s.omega2 - s.omega_init) * t / s.t_sw;
    case SegmentKind::Hold1: return s.omega1;
    case SegmentKind::Hold2: return s.omega2;
  }
  return 0.0;
}

double segment_value(const SegmentSpec& s, double t) {
  switch (s.kind) {
    case SegmentKind::Sweep1:
      return 0.5 * gaussian(t, s.t_sw, s.sigma) * s.A1 * std::sin(fast_phase(s, t));
    case SegmentKind::Hold1:
      return 0.5 * s.A1 * std::sin(fast_phase(s, t));
    case SegmentKind::Sweep2: {
      const double f = fast_phase(s, t);
      return 0.5 * s.A1 * std::sin(f) +
             0.5 * gaussian(t, s.t_sw, s.sigma) * s.A2 * std::sin(f + M_PI / 2) * std::sin(slow_phase(s, t));
    }
    case SegmentKind::Hold2: {
      const double f = fast_phase(s, t);
      return 0.5 * s.A1 * std::sin(f) + 0.5 * s.A2 * std::sin(f + M_PI / 2) * std::sin(slow_phase(s, t));
    }
  }
  return 0.0;
}

double max_frequency(const SegmentSpec& s) {
  switch (s.kind) {
    case SegmentKind::Sweep1: return std::max(std::abs(s.omega_init), std::abs(s.omega1));
    case SegmentKind::Hold1: return std::abs(s.omega1);
    case SegmentKind::Sweep2:
      return std::abs(s.omega1) + std::max(std::abs(s.omega_init), std::abs(s.omega2));
    case SegmentKind::Hold2: return std::abs(s.omega1) + std::abs(s.omega2);
  }
  return 0.0;
}

namespace {

SampledWaveform sample_function(double duration, double rate, const auto& f) {
  if (!(rate > 0.0)) throw DomainError("sample rate must be positive");
  SampledWaveform wf;
  wf.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  wf.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) wf.samples[i] = f(static_cast<double>(i) / rate);
  return wf;
}

SampledWaveform synth_checked(const SegmentSpec& s, SegmentKind expected, double rate) {
  if (s.kind != expected) throw DomainError("segment kind mismatch: expected " + to_string(expected));
  validate(s);
  return sample_function(s.duration, rate, [&](double t) { return segment_value(s, t); });
}

}  // namespace

SampledWaveform synth_first_sweep(const SegmentSpec& s, double rate) { return synth_checked(s, SegmentKind::Sweep1, rate); }
SampledWaveform synth_hold1(const SegmentSpec& s, double rate) { return synth_checked(s, SegmentKind::Hold1, rate); }
SampledWaveform synth_second_sweep(const SegmentSpec& s, double rate) { return synth_checked(s, SegmentKind::Sweep2, rate); }
SampledWaveform synth_hold2(const SegmentSpec& s, double rate) { return synth_checked(s, SegmentKind::Hold2, rate); }
SampledWaveform synthesize(const SegmentSpec& s, double rate) { return synth_checked(s, s.kind, rate); }

double Program::duration() const {
  if (segments.empty()) return 0.0;
  return starts.back() + segments.back().duration;
}

double Program::value(double t) const {
  if (segments.empty() || t < 0.0) return 0.0;
  const auto it = std::upper_bound(starts.begin(), starts.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - starts.begin()) - 1;
  return segment_value(segments[i], t - starts[i]);
}

double Program::max_frequency() const {
  double f = 0.0;
  for (const auto& s : segments) f = std::max(f, cddclock::max_frequency(s));
  return f;
}

Program stitch_program(std::vector<SegmentSpec> segments) {
  Program p;
  double t = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    SegmentSpec& s = segments[i];
    validate(s);
    if (i > 0) {
      const SegmentSpec& prev = segments[i - 1];
      if (rank(s.kind) <= rank(prev.kind)) {
        throw DomainError("incompatible segment order: " + to_string(prev.kind) + " followed by " + to_string(s.kind));
      }
      s.phi1 = wrap(fast_phase(prev, prev.duration));
      if (has_slow_tone(s.kind) && has_slow_tone(prev.kind)) s.phi2 = wrap(slow_phase(prev, prev.duration));
    }
    p.starts.push_back(t);
    t += s.duration;
  }
  p.segments = std::move(segments);
  return p;
}

std::vector<double> boundary_phase_mismatch(const Program& p) {
  std::vector<double> out;
  for (std::size_t i = 1; i < p.segments.size(); ++i) {
    const SegmentSpec& a = p.segments[i - 1];
    const SegmentSpec& b = p.segments[i];
    double m = std::abs(wrap_signed(fast_phase(a, a.duration) - fast_phase(b, 0.0)));
    if (has_slow_tone(a.kind) && has_slow_tone(b.kind)) {
      m = std::max(m, std::abs(wrap_signed(slow_phase(a, a.duration) - slow_phase(b, 0.0))));
    }
    out.push_back(m);
  }
  return out;
}

SampledWaveform sample(const Program& p, double rate) {
  SampledWaveform wf = sample_function(p.duration(), rate, [&](double t) { return p.value(t); });
  for (std::size_t i = 1; i < p.starts.size(); ++i) {
    wf.boundaries.push_back(static_cast<std::size_t>(std::ceil(p.starts[i] * rate - 1e-9)));
  }
  return wf;
}

SampledWaveform stitch(const std::vector<SegmentSpec>& segments, double rate) {
  return sample(stitch_program(segments), rate);
}

std::complex<double> Tone::correction(double f) const {
  if (corr.empty()) return 1.0;
  if (corr.size() == 1 || f <= corr_freq.front()) return corr.front();
  if (f >= corr_freq.back()) return corr.back();
  const auto it = std::upper_bound(corr_freq.begin(), corr_freq.end(), f);
  const std::size_t j = static_cast<std::size_t>(it - corr_freq.begin());
  const double w = (f - corr_freq[j - 1]) / (corr_freq[j] - corr_freq[j - 1]);
  const double mag = (1 - w) * std::abs(corr[j - 1]) + w * std::abs(corr[j]);
  const double a0 = std::arg(corr[j - 1]);
  const double arg = a0 + w * wrap_signed(std::arg(corr[j]) - a0);
  return std::polar(mag, arg);
}

double Tone::value(double t) const {
  const double env = env_sigma > 0.0 ? gaussian(t, env_center, env_sigma) : 1.0;
  const std::complex<double> c = correction(frequency(t));
  const double cycles = f0 * t + 0.5 * chirp * t * t;
  return env * amplitude * std::abs(c) * std::sin(cycles_to_phase(cycles) + phase + std::arg(c));
}

double ToneProgram::duration() const {
  if (segments.empty()) return 0.0;
  return starts.back() + segments.back().duration;
}

double ToneProgram::value(double t) const {
  if (segments.empty() || t < 0.0) return 0.0;
  const auto it = std::upper_bound(starts.begin(), starts.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - starts.begin()) - 1;
  double y = 0.0;
  for (const Tone& tone : segments[i].tones) y += tone.value(t - starts[i]);
  return y;
}

ToneSegment decompose(const SegmentSpec& s) {
  ToneSegment out;
  out.duration = s.duration;
  const double k1 = s.kind == SegmentKind::Sweep1 ? (s.omega1 - s.omega_init) / s.t_sw : 0.0;
  const double k2 = s.kind == SegmentKind::Sweep2 ? (s.omega2 - s.omega_init) / s.t_sw : 0.0;
  const bool sweep = is_sweep(s.kind);

  Tone carrier;
  carrier.amplitude = 0.5 * s.A1;
  if (s.kind == SegmentKind::Sweep1) {
    carrier.f0 = s.omega_init;
    carrier.chirp = k1;
    carrier.env_center = s.t_sw;
    carrier.env_sigma = s.sigma;
  } else {
    carrier.f0 = s.omega1;
    carrier.phase = s.phi1;
  }
  out.tones.push_back(carrier);
  if (!has_slow_tone(s.kind)) return out;

  // sin(a + pi/2) sin(b) = (sin(a - b + pi) + sin(a + b)) / 2
  const double f2 = s.kind == SegmentKind::Sweep2 ? s.omega_init : s.omega2;
  Tone lower;
  lower.amplitude = 0.25 * s.A2;
  lower.f0 = s.omega1 - f2;
  lower.chirp = -k2;
  lower.phase = s.phi1 - s.phi2 + M_PI;
  Tone upper = lower;
  upper.f0 = s.omega1 + f2;
  upper.chirp = k2;
  upper.phase = s.phi1 + s.phi2;
  if (sweep) {
    lower.env_center = upper.env_center = s.t_sw;
    lower.env_sigma = upper.env_sigma = s.sigma;
  }
  out.tones.push_back(lower);
  out.tones.push_back(upper);
  return out;
}

ToneProgram decompose(const Program& p) {
  ToneProgram out;
  out.starts = p.starts;
  for (const auto& s : p.segments) out.segments.push_back(decompose(s));
  return out;
}

SampledWaveform sample(const ToneProgram& p, double rate) {
  SampledWaveform wf = sample_function(p.duration(), rate, [&](double t) { return p.value(t); });
  for (std::size_t i = 1; i < p.starts.size(); ++i) {
    wf.boundaries.push_back(static_cast<std::size_t>(std::ceil(p.starts[i] * rate - 1e-9)));
  }
  return wf;
}

void export_samples_csv(const SampledWaveform& wf, const std::string& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  std::istringstream lines(header);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", wf.sample_rate);
  out << "# sample_rate=" << buf << '\n' << "index,value\n";
  for (std::size_t i = 0; i < wf.samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", wf.samples[i]);
    out << i << ',' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

void export_samples_raw(const SampledWaveform& wf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (double v : wf.samples) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

SampledWaveform read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  SampledWaveform wf;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("# sample_rate=", 0) == 0) {
      wf.sample_rate = std::stod(line.substr(14));
    } else if (!line.empty() && line[0] != '#' && line != "index,value") {
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw std::runtime_error(path + ": malformed row '" + line + "'");
      wf.samples.push_back(std::stod(line.substr(comma + 1)));
    }
  }
  return wf;
}

std::vector<float> read_samples_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<float> out;
  std::uint32_t bits;
  while (in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out.push_back(std::bit_cast<float>(bits));
  }
  return out;
}

}  // namespace cddclock
