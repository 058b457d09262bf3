#pragma once

namespace cddclock {

/// One rf dressing stage acting on a Zeeman manifold.
///
/// `omega` is the drive frequency and `Omega` the field amplitude in Hz before
/// the g-factor is applied. `Delta` is the detuning from the reference
/// splitting of the stage (bare splitting for stage 1, first-stage dressed
/// splitting for stage 2), so `omega = reference - Delta`.
struct DriveStage {
  double omega = 0.0;
  double Omega = 0.0;
  double Delta = 0.0;
  double phase = 0.0;  // rad

  [[nodiscard]] bool active() const { return Omega > 0.0; }
};

}  // namespace cddclock
