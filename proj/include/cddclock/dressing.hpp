#pragma once

#include <array>

#include "cddclock/constants.hpp"
#include "cddclock/drive.hpp"
#include "cddclock/spin.hpp"

namespace cddclock {

/// Both dressing stages of one manifold plus its bare splitting.
///
/// The bare splitting is g mu_B B0 / h + bare_offset. The offset absorbs
/// shifts that are not part of the linear Zeeman model (for the
/// presets it carries the residual between the configured D drive frequency
/// and g_D mu_B B0 / h).
struct ManifoldDrive {
  SpinManifold manifold;
  double bare_offset = 0.0;  // Hz
  DriveStage stage1;
  DriveStage stage2;
};

/// Dressed quantum numbers (m0, m1, m2) of the probed S and D states.
struct TargetTransition {
  double m0_S = -0.5, m1_S = 0.5, m2_S = 0.5;
  double m0_D = -1.5, m1_D = 0.5, m2_D = 0.5;
};

struct CddParameterSet {
  double B0 = 0.0;  // T
  ManifoldDrive S;
  ManifoldDrive D;
  double laser_Omega = 0.0;  // Hz
  TargetTransition target;

  [[nodiscard]] const ManifoldDrive& manifold(ManifoldLabel l) const {
    return l == ManifoldLabel::S ? S : D;
  }
  ManifoldDrive& manifold(ManifoldLabel l) { return l == ManifoldLabel::S ? S : D; }
};

/// cos(theta) per stage and manifold.
struct MixingAngles {
  double cos1_S = 1.0, cos2_S = 1.0;
  double cos1_D = 1.0, cos2_D = 1.0;
};

/// Slowly varying perturbations of the drive configuration.
struct FieldPerturbation {
  double dB_nT = 0.0;
  /// Fractional amplitude deviations dOmega/Omega.
  double amp_S1 = 0.0, amp_S2 = 0.0, amp_D1 = 0.0, amp_D2 = 0.0;
};

/// sqrt((g Omega / 2)^2 + Delta^2).
double dressed_splitting(double Omega, double Delta, double g);

/// Amplitude with which stage 2 enters the first-stage dressed frame.
///
/// The sin(w1 t) cos(w2 t) product of the second drive line contributes
/// Omega2/2 cos(w2 t) transverse to the first dressed axis, so the stage-2
/// Rabi splitting on resonance is g Omega2 / 4.
inline double first_frame_amplitude(const DriveStage& stage2) { return 0.5 * stage2.Omega; }

double bare_splitting(const ManifoldDrive& m, double B0, const PhysicalConstants& c = {});
double first_stage_splitting(const ManifoldDrive& m);
double second_stage_splitting(const ManifoldDrive& m);

/// cos(theta) = Delta / omega_bar; rejects |Delta| > omega_bar.
double mixing_angle(double Delta, double omega_bar);

MixingAngles mixing_angles(const CddParameterSet& set);

/// Linear field sensitivity of the target transition in Hz/nT.
double zeeman_sensitivity(const CddParameterSet& set, const MixingAngles& angles,
                          const PhysicalConstants& c = {});

/// (1 - 3 cos^2 theta1)(1 - 3 cos^2 theta2).
double qps_suppression_factor(double cos_theta1, double cos_theta2);

/// Orientation average P2(cos theta1) P2(cos theta2) of a rank-2 tensor shift
/// in the doubly dressed basis, qps_suppression_factor / 4.
double dressed_qps_weight(double cos_theta1, double cos_theta2);

/// Detuning giving cos^2 theta = 1/3 for a stage of amplitude Omega:
/// (g Omega / 2) / sqrt(2) = g Omega / sqrt(8).
double magic_detuning(double Omega, double g);

/// Magic stage-2 detuning of a manifold, using the first-frame amplitude.
double magic_detuning_for(const ManifoldDrive& m);

/// Delta_2^S that cancels the linear sensitivity of the target transition.
/// Bisection over the stage-2 S detuning to 1e-3 Hz. Throws NumericError
/// when the bracket holds no sign change.
double compensation_detuning_S(const CddParameterSet& set, const PhysicalConstants& c = {});

/// Lab-frame quasi-energy of a dressed level measured from m0 times the
/// nominal bare splitting: m0 (w1 - w0) + m1 w2 + m2 omega_bar_2 when both
/// stages run, m0 (w1 - w0) + m1 omega_bar_1 with one stage.
double dressed_level_offset(const ManifoldDrive& m, double m0, double m1, double m2);

/// Frequency of the target artificial transition relative to the bare
/// m0_S -> m0_D line (D level offset minus S level offset).
double artificial_transition_frequency(const CddParameterSet& set);

/// Target transition frequency shift under a perturbation, relative to the
/// unperturbed set. Drive frequencies stay fixed.
double transition_shift(const CddParameterSet& set, const FieldPerturbation& p,
                        const PhysicalConstants& c = {});

/// Recompute every Delta from the drive frequencies, B0 and offsets.
void resolve_detunings(CddParameterSet& set, const PhysicalConstants& c = {});

/// Set drive frequencies of a manifold from the requested detunings.
void retune(ManifoldDrive& m, double B0, double Delta1, double Delta2,
            const PhysicalConstants& c = {});

/// Check hierarchy, laser coupling and detuning consistency. Throws DomainError.
void validate(const CddParameterSet& set, const PhysicalConstants& c = {});

/// Rows of a preset parameter listing (frequencies Hz, sweep times us).
struct PresetParameters {
  double omega_S1, omega_D1, Omega_S1, Omega_D1, Omega_S2, Omega_D2, omega_S2, omega_D2;
  double Delta_omega_sw1, t_sw1, Delta_omega_sw2, t_sw2;
};

PresetParameters resonant_preset();
PresetParameters magic_preset();

/// Build a parameter set from preset-style drive frequencies. B0 is
/// back-solved from omega_S1 and the D offset absorbs the residual so that
/// both first stages sit at zero detuning.
CddParameterSet parameter_set_from_table(const PresetParameters& t, double g_S = kGFactorS,
                                         double g_D = kGFactorD, double laser_Omega = 10.0,
                                         const PhysicalConstants& c = {});

}  // namespace cddclock
