#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace cddclock {

enum class SegmentKind { Sweep1, Hold1, Sweep2, Hold2 };

std::string to_string(SegmentKind kind);

/// One piece of a coil drive program.
///
/// Frequencies are in Hz (the phase of a tone is 2*pi*f*t), amplitudes in
/// volts at the coil input, times in seconds. Time inside a segment is local,
/// starting at 0.
struct SegmentSpec {
  SegmentKind kind = SegmentKind::Hold1;
  double A1 = 0.0;
  double A2 = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega_init = 0.0;  // start frequency of the swept tone
  double t_sw = 0.0;
  double sigma = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double duration = 0.0;
};

/// Throws DomainError for invalid timing or an oversized sweep range.
void validate(const SegmentSpec& s);

/// Waveform value of one segment at local time t.
double segment_value(const SegmentSpec& s, double t);

/// Largest instantaneous tone frequency in the segment.
double max_frequency(const SegmentSpec& s);

struct SampledWaveform {
  double sample_rate = 0.0;
  std::vector<double> samples;
  std::vector<std::size_t> boundaries;  // first sample index of each segment after the first
};

SampledWaveform synth_first_sweep(const SegmentSpec& s, double sample_rate);
SampledWaveform synth_hold1(const SegmentSpec& s, double sample_rate);
SampledWaveform synth_second_sweep(const SegmentSpec& s, double sample_rate);
SampledWaveform synth_hold2(const SegmentSpec& s, double sample_rate);
SampledWaveform synthesize(const SegmentSpec& s, double sample_rate);

/// Phase of the fast (first-stage) carrier at local time t, excluding the
/// constant offsets of the quadrature term.
double fast_phase(const SegmentSpec& s, double t);
/// Phase of the slow (second-stage) tone at local time t.
double slow_phase(const SegmentSpec& s, double t);
/// Instantaneous frequency of the swept tone at local time t.
double sweep_frequency(const SegmentSpec& s, double t);

/// A drive program: segments with phases solved for continuity.
struct Program {
  std::vector<SegmentSpec> segments;
  std::vector<double> starts;  // global start time of each segment

  [[nodiscard]] double duration() const;
  [[nodiscard]] double value(double t) const;
  [[nodiscard]] double max_frequency() const;
};

/// Orders must follow sweep1 -> hold1 -> sweep2 -> hold2; any ordered subset
/// is accepted. The phases of each segment after the first are overwritten.
Program stitch_program(std::vector<SegmentSpec> segments);

/// Largest phase jump of any tone across the segment boundaries, rad.
std::vector<double> boundary_phase_mismatch(const Program& p);

SampledWaveform sample(const Program& p, double sample_rate);
SampledWaveform stitch(const std::vector<SegmentSpec>& segments, double sample_rate);

/// A sinusoid sin(2*pi*(f0*t + chirp*t^2/2) + phase) with an optional
/// truncated Gaussian envelope and an optional frequency-dependent complex
/// correction interpolated over the instantaneous frequency.
struct Tone {
  double amplitude = 0.0;
  double f0 = 0.0;
  double chirp = 0.0;  // Hz/s
  double phase = 0.0;
  double env_center = 0.0;
  double env_sigma = 0.0;  // 0 means constant envelope
  std::vector<double> corr_freq;
  std::vector<std::complex<double>> corr;

  [[nodiscard]] double frequency(double t) const { return f0 + chirp * t; }
  [[nodiscard]] std::complex<double> correction(double f) const;
  [[nodiscard]] double value(double t) const;
};

struct ToneSegment {
  std::vector<Tone> tones;
  double duration = 0.0;
};

struct ToneProgram {
  std::vector<ToneSegment> segments;
  std::vector<double> starts;

  [[nodiscard]] double duration() const;
  [[nodiscard]] double value(double t) const;
};

/// Exact decomposition of a segment into tones (product-to-sum).
ToneSegment decompose(const SegmentSpec& s);
ToneProgram decompose(const Program& p);

SampledWaveform sample(const ToneProgram& p, double sample_rate);

/// CSV with a comment header, columns index,value.
void export_samples_csv(const SampledWaveform& wf, const std::string& path,
                        const std::string& header = {});
/// Little-endian 32-bit float array, no header.
void export_samples_raw(const SampledWaveform& wf, const std::string& path);
SampledWaveform read_samples_csv(const std::string& path);
std::vector<float> read_samples_raw(const std::string& path);

}  // namespace cddclock
