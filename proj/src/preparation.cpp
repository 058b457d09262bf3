#include "cddclock/preparation.hpp"

#include <cmath>
#include <sstream>

#include "cddclock/errors.hpp"
#include "cddclock/floquet.hpp"

namespace cddclock {

namespace {

bool has_slow_tone(SegmentKind k) { return k == SegmentKind::Sweep2 || k == SegmentKind::Hold2; }

// Drive equivalent to the program at its last instant: amplitudes and
// frequencies of the final segment, phases mapped onto the cosine convention
// of the drive field.
ManifoldDrive drive_at_end(const ManifoldDrive& base, const Program& p, const CoilCalibration& cal) {
  const SegmentSpec& s = p.segments.back();
  ManifoldDrive m = base;
  const bool second = has_slow_tone(s.kind);
  m.stage1.omega = s.omega1;
  m.stage1.Omega = 0.5 * cal.Omega_per_volt * s.A1;
  m.stage1.phase = fast_phase(s, s.duration) - M_PI / 2;
  if (second) {
    m.stage2.omega = s.omega2;
    m.stage2.Omega = 0.5 * cal.Omega_per_volt * s.A2;
    m.stage2.phase = slow_phase(s, s.duration) - M_PI / 2;
  } else {
    m.stage2 = DriveStage{};
  }
  return m;
}

}  // namespace

SweepSettings sweeps_from_table(const PresetParameters& t) {
  SweepSettings s;
  s.Delta_omega_sw1 = t.Delta_omega_sw1;
  s.t_sw1 = t.t_sw1 * 1e-6;
  s.Delta_omega_sw2 = t.Delta_omega_sw2;
  s.t_sw2 = t.t_sw2 * 1e-6;
  return s;
}

Program preparation_program(const ManifoldDrive& m, const SweepSettings& sw, const CoilCalibration& cal) {
  const double A1 = 2.0 * m.stage1.Omega / cal.Omega_per_volt;
  const double A2 = 2.0 * m.stage2.Omega / cal.Omega_per_volt;
  std::vector<SegmentSpec> seg;

  SegmentSpec s1;
  s1.kind = SegmentKind::Sweep1;
  s1.A1 = A1;
  s1.omega1 = m.stage1.omega;
  s1.omega_init = m.stage1.omega - sw.Delta_omega_sw1;
  s1.t_sw = s1.duration = sw.t_sw1;
  s1.sigma = sw.sigma_fraction * sw.t_sw1;
  seg.push_back(s1);

  if (sw.hold1 > 0.0) {
    SegmentSpec h1;
    h1.kind = SegmentKind::Hold1;
    h1.A1 = A1;
    h1.omega1 = m.stage1.omega;
    h1.duration = sw.hold1;
    seg.push_back(h1);
  }

  if (m.stage2.active()) {
    SegmentSpec s2;
    s2.kind = SegmentKind::Sweep2;
    s2.A1 = A1;
    s2.A2 = A2;
    s2.omega1 = m.stage1.omega;
    s2.omega2 = m.stage2.omega;
    s2.omega_init = m.stage2.omega - sw.Delta_omega_sw2;
    s2.t_sw = s2.duration = sw.t_sw2;
    s2.sigma = sw.sigma_fraction * sw.t_sw2;
    seg.push_back(s2);
    if (sw.hold2 > 0.0) {
      SegmentSpec h2 = s2;
      h2.kind = SegmentKind::Hold2;
      h2.duration = sw.hold2;
      seg.push_back(h2);
    }
  }
  return stitch_program(std::move(seg));
}

Program hold_program(const ManifoldDrive& m, double duration, const CoilCalibration& cal) {
  SegmentSpec h;
  h.kind = m.stage2.active() ? SegmentKind::Hold2 : SegmentKind::Hold1;
  h.A1 = 2.0 * m.stage1.Omega / cal.Omega_per_volt;
  h.A2 = 2.0 * m.stage2.Omega / cal.Omega_per_volt;
  h.omega1 = m.stage1.omega;
  h.omega2 = m.stage2.omega;
  h.phi1 = m.stage1.phase + M_PI / 2;
  h.phi2 = m.stage2.phase + M_PI / 2;
  h.duration = duration;
  return stitch_program({h});
}

PreparationResult simulate_adiabatic_preparation(const CddParameterSet& set, const Program& program,
                                                 const StateVector& psi0, const PreparationOptions& opt,
                                                 const PhysicalConstants& c) {
  if (program.segments.empty()) throw DomainError("preparation program is empty");
  if (psi0.amplitudes.size() != 8) throw DomainError("initial state must cover the 8-level joint basis");
  if (psi0.amplitudes.tail(6).squaredNorm() > 1e-12) {
    throw DomainError("preparation simulates the S manifold only; the D block must be empty");
  }
  const ManifoldDrive& S = set.S;
  const double w0 = bare_splitting(S, set.B0, c);
  const double kg = S.manifold.g * opt.calibration.Omega_per_volt;
  SpinField field{std::max(std::abs(w0), program.max_frequency()),
                  [&](double t) { return Eigen::Vector3d(kg * program.value(t), 0.0, w0); }};

  const double T = program.duration();
  const Mat2 U = propagate_su2(field, 0.0, T, opt.propagation);
  const Eigen::Vector2cd psi = U * psi0.amplitudes.head(2);

  const ManifoldDrive end = drive_at_end(S, program, opt.calibration);
  const Eigen::Vector3d n = analytic_dressed_axis(end, set.B0, c);
  // Spin-1/2 states along +n and -n.
  const double th = std::acos(std::clamp(n.z(), -1.0, 1.0));
  const double ph = std::atan2(n.y(), n.x());
  Eigen::Vector2cd up(std::cos(th / 2), std::polar(std::sin(th / 2), ph));
  Eigen::Vector2cd down(-std::polar(std::sin(th / 2), -ph), std::cos(th / 2));

  PreparationResult r;
  r.duration = T;
  r.m = {0.5, -0.5};
  r.population = {std::norm(up.dot(psi)), std::norm(down.dot(psi))};
  const double target = end.stage2.active() ? set.target.m2_S : set.target.m1_S;
  r.target_population = target > 0 ? r.population[0] : r.population[1];
  if (r.target_population < 0.5) {
    std::ostringstream msg;
    msg << "non-adiabatic preparation: target population " << r.target_population << " < 0.5";
    r.warning = msg.str();
  }
  return r;
}

}  // namespace cddclock
