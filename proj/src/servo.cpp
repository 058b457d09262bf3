#include "cddclock/servo.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cddclock/errors.hpp"
#include "cddclock/linescan.hpp"
#include "cddclock/parallel.hpp"
#include "cddclock/spin.hpp"

namespace cddclock {

void validate(const ServoConfig& s) {
  if (!(s.probe_time > 0.0)) throw DomainError("probe_time must be positive");
  if (!(s.duty_cycle > 0.0) || s.duty_cycle > 1.0) throw DomainError("duty_cycle must lie in (0, 1]");
  if (!(s.gain > 0.0) || s.gain >= 2.0) throw DomainError("servo gain must lie in (0, 2)");
  if (s.half_width < 0.0) throw DomainError("half_width must be non-negative");
}

OperatingPoint operating_point(double probe_time, double half_width) {
  const double Omega = pi_pulse_rabi(probe_time);
  const double h = 1e-4 * half_width;
  OperatingPoint op;
  op.p = rabi_lineshape(Omega, half_width, probe_time);
  op.slope = std::abs(rabi_lineshape(Omega, half_width + h, probe_time) -
                      rabi_lineshape(Omega, half_width - h, probe_time)) /
             (2.0 * h);
  return op;
}

double qpn_instability(const ServoConfig& s, double nu0, int n_records) {
  const OperatingPoint op = operating_point(s.probe_time, s.effective_half_width());
  const double sigma_f = std::sqrt(2.0 * op.p * (1.0 - op.p)) / (2.0 * op.slope);
  const double pair = 2.0 * s.cycle_time();
  return sigma_f / nu0 * std::sqrt(pair) / std::sqrt(static_cast<double>(n_records));
}

ClockRun run_clock_servo(const CddParameterSet& set, const IonCrystal& crystal, const TrapConfig& trap,
                         const NoiseModel& noise, const ServoConfig& servo, double duration,
                         const PhysicalConstants& c) {
  validate(servo);
  const double cycle = servo.cycle_time();
  if (duration < 100.0 * cycle) throw DomainError("servo duration must cover at least 100 cycles");
  const int N = static_cast<int>(crystal.positions.size());
  if (N < 1) throw DomainError("crystal holds no ions");

  std::vector<double> qps(N, 0.0);
  if (servo.include_qps && N > 1) {
    const double k = servo.qps_coefficient != 0.0
                         ? servo.qps_coefficient
                         : dressed_qps_coefficient(set, default_quadrupole_moment(c), c);
    const GradientProfile g = axial_field_gradient(crystal, trap, c);
    for (int i = 0; i < N; ++i) qps[i] = k * g.gradient[i];
  }

  const NoiseProcess process(noise);
  process.prepare(duration + cycle);
  const int pairs = static_cast<int>(std::floor(duration / (2.0 * cycle)));
  const double hw = servo.effective_half_width();
  const double Omega = pi_pulse_rabi(servo.probe_time);
  const OperatingPoint op = operating_point(servo.probe_time, hw);

  // Transition offset of every ion for every probe.
  std::vector<std::vector<double>> center(N, std::vector<double>(2 * static_cast<std::size_t>(pairs)));
  parallel_for(N, servo.jobs, [&](int i) {
    for (int k = 0; k < 2 * pairs; ++k) {
      center[i][k] = qps[i] + averaged_shift(set, process, k * cycle, servo.probe_time, crystal.positions[i],
                                             servo.noise_points, c);
    }
  });

  ClockRun run;
  run.seed = servo.seed;
  run.pair_time = 2.0 * cycle;
  run.positions = crystal.positions;
  for (int k = 0; k < pairs; ++k) run.timestamps.push_back((k + 1) * run.pair_time);

  const int R = servo.readout == Readout::Camera ? N : 1;
  run.frequency.assign(R, {});
  run.true_offset.assign(R, 0.0);
  std::vector<std::string> unlock(R);
  parallel_for(R, servo.jobs, [&](int r) {
    std::mt19937_64 rng = seeded_rng(servo.seed, static_cast<std::uint64_t>(r), 0xc10c);
    // side = +-half_width; the detuning is formed before adding the side so
    // that a centred laser sees an exactly symmetric pair.
    auto probe = [&](int k, double f, double side) {
      if (servo.readout == Readout::Camera) {
        const double p = rabi_lineshape(Omega, (f - center[r][k]) + side, servo.probe_time);
        if (!servo.projection_noise) return p;
        std::bernoulli_distribution shot(p);
        return shot(rng) ? 1.0 : 0.0;
      }
      double p = 0.0;
      for (int i = 0; i < N; ++i) p += rabi_lineshape(Omega, (f - center[i][k]) + side, servo.probe_time);
      if (!servo.projection_noise) return p / N;
      std::binomial_distribution<int> shots(N, p / N);
      return static_cast<double>(shots(rng)) / N;
    };
    auto truth = [&](int k) {
      if (servo.readout == Readout::Camera) return center[r][k];
      double s = 0.0;
      for (int i = 0; i < N; ++i) s += center[i][k];
      return s / N;
    };
    std::vector<double>& rec = run.frequency[r];
    rec.reserve(pairs);
    double f = truth(0);
    double sum_truth = 0.0;
    for (int k = 0; k < pairs; ++k) {
      const double e_plus = probe(2 * k, f, hw);
      const double e_minus = probe(2 * k + 1, f, -hw);
      // Higher excitation on the upper side means the line sits above f.
      f += servo.gain * (e_plus - e_minus) / (2.0 * op.slope);
      rec.push_back(f);
      const double nu = 0.5 * (truth(2 * k) + truth(2 * k + 1));
      sum_truth += nu;
      if (std::abs(nu - f) > 3.0 * hw) {
        std::ostringstream os;
        os << "servo unlocked on record " << r << " at pair " << k << " (t = " << run.timestamps[k]
           << " s): error " << nu - f << " Hz";
        unlock[r] = os.str();
        return;
      }
    }
    run.true_offset[r] = sum_truth / pairs;
  });
  for (const std::string& u : unlock) {
    if (!u.empty()) throw NumericError(u);
  }

  double fastest = 0.0;
  for (const MainsHarmonic& h : noise.mains) {
    if (h.amplitude > 0.0) fastest = std::max(fastest, h.frequency);
  }
  const double rabi2 = std::min(second_stage_splitting(set.S), second_stage_splitting(set.D));
  if (set.S.stage2.active() && fastest > 0.1 * rabi2) {
    std::ostringstream os;
    os << "noise at " << fastest << " Hz is not slow against the stage-2 splitting " << rabi2 << " Hz";
    run.note = os.str();
  }
  return run;
}

}  // namespace cddclock
