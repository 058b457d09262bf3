#include "cddclock/dressing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cddclock/errors.hpp"

namespace cddclock {

namespace {

// Quantum number that carries the field response of the innermost
// active dressing stage.
double innermost_m(const ManifoldDrive& m, double m0, double m1, double m2) {
  if (!m.stage1.active()) return m0;
  if (!m.stage2.active()) return m1;
  return m2;
}

ManifoldDrive perturbed(const ManifoldDrive& m, double B0, double amp1, double amp2,
                        const PhysicalConstants& c) {
  ManifoldDrive p = m;
  p.stage1.Omega *= 1.0 + amp1;
  p.stage2.Omega *= 1.0 + amp2;
  p.stage1.Delta = bare_splitting(p, B0, c) - p.stage1.omega;
  p.stage2.Delta = first_stage_splitting(p) - p.stage2.omega;
  return p;
}

double level_energy(const ManifoldDrive& m, double B0, double m0, double m1, double m2,
                    const PhysicalConstants& c) {
  if (!m.stage1.active()) return m0 * bare_splitting(m, B0, c);
  if (!m.stage2.active()) return m0 * m.stage1.omega + m1 * first_stage_splitting(m);
  return m0 * m.stage1.omega + m1 * m.stage2.omega + m2 * second_stage_splitting(m);
}

}  // namespace

double dressed_splitting(double Omega, double Delta, double g) {
  if (Omega < 0.0) throw DomainError("drive amplitude must be non-negative");
  return std::hypot(0.5 * g * Omega, Delta);
}

double bare_splitting(const ManifoldDrive& m, double B0, const PhysicalConstants& c) {
  return m.manifold.g * c.mu_B_over_h * B0 + m.bare_offset;
}

double first_stage_splitting(const ManifoldDrive& m) {
  return dressed_splitting(m.stage1.Omega, m.stage1.Delta, m.manifold.g);
}

double second_stage_splitting(const ManifoldDrive& m) {
  return dressed_splitting(first_frame_amplitude(m.stage2), m.stage2.Delta, m.manifold.g);
}

double mixing_angle(double Delta, double omega_bar) {
  if (!(omega_bar > 0.0)) {
    if (Delta == 0.0) return 0.0;
    throw DomainError("mixing angle needs a positive dressed splitting");
  }
  const double c = Delta / omega_bar;
  if (std::abs(c) > 1.0 + 1e-12) {
    throw DomainError("|Delta| = " + std::to_string(std::abs(Delta)) +
                      " Hz exceeds the dressed splitting " + std::to_string(omega_bar) + " Hz");
  }
  return std::clamp(c, -1.0, 1.0);
}

MixingAngles mixing_angles(const CddParameterSet& set) {
  auto stage_cos = [](const ManifoldDrive& m, int stage) {
    const DriveStage& s = stage == 1 ? m.stage1 : m.stage2;
    if (!s.active()) return 1.0;
    const double w = stage == 1 ? first_stage_splitting(m) : second_stage_splitting(m);
    return mixing_angle(s.Delta, w);
  };
  MixingAngles a;
  a.cos1_S = stage_cos(set.S, 1);
  a.cos2_S = stage_cos(set.S, 2);
  a.cos1_D = stage_cos(set.D, 1);
  a.cos2_D = stage_cos(set.D, 2);
  return a;
}

double zeeman_sensitivity(const CddParameterSet& set, const MixingAngles& a,
                          const PhysicalConstants& c) {
  const TargetTransition& t = set.target;
  const double mD = innermost_m(set.D, t.m0_D, t.m1_D, t.m2_D);
  const double mS = innermost_m(set.S, t.m0_S, t.m1_S, t.m2_S);
  return c.mu_B_over_h_per_nT() * (a.cos1_D * a.cos2_D * set.D.manifold.g * mD -
                                   a.cos1_S * a.cos2_S * set.S.manifold.g * mS);
}

double qps_suppression_factor(double c1, double c2) {
  if (c1 * c1 > 1.0 + 1e-12 || c2 * c2 > 1.0 + 1e-12) {
    throw DomainError("cos(theta) outside [-1, 1]");
  }
  return (1.0 - 3.0 * c1 * c1) * (1.0 - 3.0 * c2 * c2);
}

double dressed_qps_weight(double c1, double c2) { return 0.25 * qps_suppression_factor(c1, c2); }

double magic_detuning(double Omega, double g) {
  if (Omega < 0.0) throw DomainError("drive amplitude must be non-negative");
  return g * Omega / std::sqrt(8.0);
}

double magic_detuning_for(const ManifoldDrive& m) {
  return magic_detuning(first_frame_amplitude(m.stage2), m.manifold.g);
}

double compensation_detuning_S(const CddParameterSet& set, const PhysicalConstants& c) {
  if (!set.S.stage2.active()) {
    throw DomainError("compensation needs an active second S stage");
  }
  auto sensitivity_at = [&](double d2) {
    CddParameterSet trial = set;
    trial.S.stage2.Delta = d2;
    return zeeman_sensitivity(trial, mixing_angles(trial), c);
  };
  const double current = set.S.stage2.Delta;
  if (std::abs(sensitivity_at(current)) < 1e-12) return current;

  const double width = 100.0 * dressed_splitting(first_frame_amplitude(set.S.stage2), 0.0,
                                                 set.S.manifold.g);
  double lo = -width, hi = width;
  double flo = sensitivity_at(lo), fhi = sensitivity_at(hi);
  if (flo * fhi > 0.0) throw NumericError("not compensable with these parameters");
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    const double fm = sensitivity_at(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double dressed_level_offset(const ManifoldDrive& m, double m0, double m1, double m2) {
  if (!m.stage1.active()) return 0.0;
  if (!m.stage2.active()) return -m0 * m.stage1.Delta + m1 * first_stage_splitting(m);
  return -m0 * m.stage1.Delta + m1 * m.stage2.omega + m2 * second_stage_splitting(m);
}

double artificial_transition_frequency(const CddParameterSet& set) {
  const TargetTransition& t = set.target;
  return dressed_level_offset(set.D, t.m0_D, t.m1_D, t.m2_D) -
         dressed_level_offset(set.S, t.m0_S, t.m1_S, t.m2_S);
}

double transition_shift(const CddParameterSet& set, const FieldPerturbation& p,
                        const PhysicalConstants& c) {
  const TargetTransition& t = set.target;
  const double B1 = set.B0 + 1e-9 * p.dB_nT;
  const ManifoldDrive S1 = perturbed(set.S, B1, p.amp_S1, p.amp_S2, c);
  const ManifoldDrive D1 = perturbed(set.D, B1, p.amp_D1, p.amp_D2, c);
  const ManifoldDrive S0 = perturbed(set.S, set.B0, 0.0, 0.0, c);
  const ManifoldDrive D0 = perturbed(set.D, set.B0, 0.0, 0.0, c);
  const double after = level_energy(D1, B1, t.m0_D, t.m1_D, t.m2_D, c) -
                       level_energy(S1, B1, t.m0_S, t.m1_S, t.m2_S, c);
  const double before = level_energy(D0, set.B0, t.m0_D, t.m1_D, t.m2_D, c) -
                        level_energy(S0, set.B0, t.m0_S, t.m1_S, t.m2_S, c);
  return after - before;
}

void resolve_detunings(CddParameterSet& set, const PhysicalConstants& c) {
  for (ManifoldDrive* m : {&set.S, &set.D}) {
    m->stage1.Delta = bare_splitting(*m, set.B0, c) - m->stage1.omega;
    m->stage2.Delta = first_stage_splitting(*m) - m->stage2.omega;
  }
}

void retune(ManifoldDrive& m, double B0, double Delta1, double Delta2,
            const PhysicalConstants& c) {
  m.stage1.Delta = Delta1;
  m.stage1.omega = bare_splitting(m, B0, c) - Delta1;
  m.stage2.Delta = Delta2;
  m.stage2.omega = first_stage_splitting(m) - Delta2;
}

void validate(const CddParameterSet& set, const PhysicalConstants& c) {
  if (!(set.B0 > 0.0)) throw DomainError("B0 must be positive");
  if (set.laser_Omega < 0.0) throw DomainError("laser_Omega must be non-negative");
  double slowest = 0.0;
  bool any = false;
  for (const ManifoldDrive* m : {&set.S, &set.D}) {
    const char* name = m == &set.S ? "S" : "D";
    if (m->stage1.Omega < 0.0 || m->stage2.Omega < 0.0) {
      throw DomainError(std::string("negative drive amplitude on ") + name);
    }
    if (m->stage2.active() && !m->stage1.active()) {
      throw DomainError(std::string("second stage on ") + name + " needs a first stage");
    }
    if (m->stage1.active()) {
      const double d1 = bare_splitting(*m, set.B0, c) - m->stage1.omega;
      const double d2 = first_stage_splitting(*m) - m->stage2.omega;
      if (std::abs(d1 - m->stage1.Delta) > 1e-6 * std::max(1.0, std::abs(m->stage1.omega)) ||
          (m->stage2.active() && std::abs(d2 - m->stage2.Delta) > 1e-6 * m->stage2.omega)) {
        throw DomainError(std::string("detunings on ") + name +
                          " are inconsistent with the drive frequencies");
      }
    }
    if (m->stage2.active()) {
      if (!(m->stage2.omega < m->stage1.omega / 10.0)) {
        throw DomainError(std::string("hierarchy violated on ") + name + ": omega2 = " +
                          std::to_string(m->stage2.omega) + " Hz is not below omega1/10");
      }
      const double r = dressed_splitting(first_frame_amplitude(m->stage2), 0.0, m->manifold.g);
      slowest = any ? std::min(slowest, r) : r;
      any = true;
    } else if (m->stage1.active()) {
      const double r = dressed_splitting(m->stage1.Omega, 0.0, m->manifold.g);
      slowest = any ? std::min(slowest, r) : r;
      any = true;
    }
  }
  if (any && set.laser_Omega > slowest / 10.0) {
    throw DomainError("laser_Omega = " + std::to_string(set.laser_Omega) +
                      " Hz exceeds a tenth of the slowest dressed Rabi frequency " +
                      std::to_string(slowest) + " Hz");
  }
}

PresetParameters resonant_preset() {
  return {10002089.0, 5994834.0, 46862.0, 115446.0, 3469.0, 6809.0,
          46915.0,    69287.0,   -150000.0, 500.0,  80000.0, 7000.0};
}

PresetParameters magic_preset() {
  PresetParameters t = resonant_preset();
  t.omega_S2 = 46951.0;
  t.omega_D2 = 70731.0;
  t.Delta_omega_sw1 = -1500000.0;
  t.Delta_omega_sw2 = 30000.0;
  return t;
}

CddParameterSet parameter_set_from_table(const PresetParameters& t, double g_S, double g_D,
                                         double laser_Omega, const PhysicalConstants& c) {
  CddParameterSet set;
  set.B0 = t.omega_S1 / (g_S * c.mu_B_over_h);
  set.S.manifold = SpinManifold::s_level(g_S);
  set.D.manifold = SpinManifold::d_level(g_D);
  set.D.bare_offset = t.omega_D1 - g_D * c.mu_B_over_h * set.B0;
  set.S.stage1 = {t.omega_S1, t.Omega_S1, 0.0, 0.0};
  set.S.stage2 = {t.omega_S2, t.Omega_S2, 0.0, 0.0};
  set.D.stage1 = {t.omega_D1, t.Omega_D1, 0.0, 0.0};
  set.D.stage2 = {t.omega_D2, t.Omega_D2, 0.0, 0.0};
  set.laser_Omega = laser_Omega;
  resolve_detunings(set, c);
  return set;
}

}  // namespace cddclock
