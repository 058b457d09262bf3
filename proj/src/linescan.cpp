#include "cddclock/linescan.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cddclock/errors.hpp"
#include "cddclock/parallel.hpp"
#include "cddclock/spin.hpp"
#include "least_squares.hpp"

namespace cddclock {

double dressed_qps_coefficient(const CddParameterSet& set, double theta_Q, const PhysicalConstants& c) {
  const MixingAngles a = mixing_angles(set);
  const bool two = set.D.stage2.active();
  const double weight = dressed_qps_weight(a.cos1_D, two ? a.cos2_D : 1.0);
  const double m = two ? set.target.m2_D : set.target.m1_D;
  const double J = set.D.manifold.J;
  return weight * theta_Q / c.planck_h * 0.375 * (J * (J + 1.0) - 3.0 * m * m);
}

double averaged_shift(const CddParameterSet& set, const NoiseProcess& noise, double t0, double duration,
                      double z, int points, const PhysicalConstants& c) {
  if (points < 1) throw DomainError("noise_points must be positive");
  double sum = 0.0;
  for (int k = 0; k < points; ++k) {
    const double t = t0 + duration * (k + 0.5) / points;
    sum += transition_shift(set, noise.at(t, z).perturbation(), c);
  }
  return sum / points;
}

namespace {

bool time_dependent(const NoiseModel& m) {
  bool mains = false;
  for (const MainsHarmonic& h : m.mains) mains = mains || h.amplitude > 0.0;
  return mains || m.slow_drift > 0.0 || m.drive_amp_noise > 0.0;
}

PeakFit fit_model(const std::vector<double>& x, const std::vector<double>& y, double c0, double a0, double b0,
                  double lo, double hi, const std::function<double(double)>& shape) {
  const int n = static_cast<int>(x.size());
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (int i = 0; i < n; ++i) r(i) = p(1) * shape(x[i] - p(0)) + p(2) - y[i];
  };
  Eigen::VectorXd p0(3);
  p0 << c0, a0, b0;
  const detail::LeastSquaresResult r = detail::least_squares(residual, p0, n);
  PeakFit f;
  f.center = r.params(0);
  f.amplitude = r.params(1);
  f.background = r.params(2);
  f.center_err = r.errors(0);
  f.ok = r.converged && std::isfinite(f.center_err) && f.center >= lo && f.center <= hi && f.amplitude > 0.0;
  if (!f.ok) {
    std::ostringstream os;
    os << "status " << r.status << ", residual " << r.rss;
    f.note = os.str();
  }
  return f;
}

}  // namespace

PeakFit fit_peak(const std::vector<double>& detunings, const std::vector<double>& excitation, double Omega,
                 double probe_time) {
  const int n = static_cast<int>(detunings.size());
  if (n != static_cast<int>(excitation.size())) throw DomainError("detunings and excitation differ in length");
  if (n < 5) throw DomainError("peak fit needs at least 5 points");
  const auto [lo, hi] = std::minmax_element(detunings.begin(), detunings.end());

  // Start from the maximum of a 3-point running mean.
  int best = 0;
  double best_v = -1.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    int k = 0;
    for (int j = std::max(0, i - 1); j <= std::min(n - 1, i + 1); ++j, ++k) s += excitation[j];
    if (s / k > best_v) {
      best_v = s / k;
      best = i;
    }
  }
  const double ymin = *std::min_element(excitation.begin(), excitation.end());
  const double c0 = detunings[best];
  PeakFit f = fit_model(detunings, excitation, c0, std::max(best_v - ymin, 0.05), ymin, *lo, *hi,
                        [&](double d) { return rabi_lineshape(Omega, d, probe_time); });
  f.lineshape = "rabi";
  if (f.ok) return f;
  const double w = 0.4 / probe_time;
  PeakFit g = fit_model(detunings, excitation, c0, std::max(best_v - ymin, 0.05), ymin, *lo, *hi,
                        [&](double d) { return std::exp(-0.5 * d * d / (w * w)); });
  g.lineshape = "gaussian";
  if (!g.ok) g.note = "rabi fit: " + f.note + "; gaussian fit: " + g.note;
  return g;
}

LineScanResult per_ion_line_scan(const CddParameterSet& set, const IonCrystal& crystal, const TrapConfig& trap,
                                 const NoiseModel& noise, const LineScanConfig& cfg,
                                 const PhysicalConstants& c) {
  if (cfg.shots < 50) throw DomainError("line scan needs at least 50 shots per point");
  if (cfg.detunings.size() < 5) throw DomainError("line scan needs at least 5 detunings");
  if (!(cfg.probe_time > 0.0) || cfg.cycle_time < cfg.probe_time) {
    throw DomainError("probe_time must be positive and at most cycle_time");
  }
  const int N = static_cast<int>(crystal.positions.size());
  if (N < 1) throw DomainError("crystal holds no ions");

  LineScanResult out;
  out.detunings = cfg.detunings;
  const double theta = cfg.theta_Q > 0.0 ? cfg.theta_Q : default_quadrupole_moment(c);
  out.qps_coefficient = cfg.qps_coefficient ? *cfg.qps_coefficient : dressed_qps_coefficient(set, theta, c);
  std::vector<double> qps(N, 0.0);
  if (cfg.include_qps && N > 1) {
    const GradientProfile g = axial_field_gradient(crystal, trap, c);
    for (int i = 0; i < N; ++i) qps[i] = out.qps_coefficient * g.gradient[i];
  }

  const NoiseProcess process(noise);
  const bool varying = time_dependent(noise);
  const int P = static_cast<int>(cfg.detunings.size());
  process.prepare(static_cast<double>(P) * cfg.shots * cfg.cycle_time + cfg.probe_time);
  const double Omega = pi_pulse_rabi(cfg.probe_time);

  out.ions.resize(N);
  parallel_for(N, cfg.jobs, [&](int i) {
    IonScan& ion = out.ions[i];
    ion.position = crystal.positions[i];
    ion.qps = qps[i];
    std::mt19937_64 rng = seeded_rng(cfg.seed, static_cast<std::uint64_t>(i), 0x5ca9);
    const double static_shift =
        varying ? 0.0 : averaged_shift(set, process, 0.0, cfg.probe_time, ion.position, 1, c);
    double shift_sum = 0.0;
    long count = 0;
    for (int k = 0; k < P; ++k) {
      int excited = 0;
      for (int s = 0; s < cfg.shots; ++s) {
        const double t0 = (static_cast<double>(k) * cfg.shots + s) * cfg.cycle_time;
        const double shift =
            varying ? averaged_shift(set, process, t0, cfg.probe_time, ion.position, cfg.noise_points, c)
                    : static_shift;
        const double center = qps[i] + shift;
        shift_sum += center;
        ++count;
        std::bernoulli_distribution shot(rabi_lineshape(Omega, cfg.detunings[k] - center, cfg.probe_time));
        excited += shot(rng) ? 1 : 0;
      }
      ion.excitation.push_back(static_cast<double>(excited) / cfg.shots);
    }
    ion.true_center = shift_sum / static_cast<double>(count);
    const PeakFit f = fit_peak(cfg.detunings, ion.excitation, Omega, cfg.probe_time);
    ion.center = f.center;
    ion.center_err = f.center_err;
    ion.amplitude = f.amplitude;
    ion.background = f.background;
    ion.fit_ok = f.ok;
    ion.lineshape = f.lineshape;
    ion.note = f.note;
  });
  return out;
}

InhomogeneityFit center_profile(const LineScanResult& r) {
  std::vector<double> z, c;
  for (const IonScan& ion : r.ions) {
    if (!ion.fit_ok) continue;
    z.push_back(ion.position);
    c.push_back(ion.center);
  }
  return inhomogeneity_fit(z, c);
}

}  // namespace cddclock
