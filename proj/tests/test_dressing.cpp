#include <cmath>

#include "cddclock/dressing.hpp"
#include "cddclock/errors.hpp"
#include "doctest.h"

using namespace cddclock;

namespace {

CddParameterSet bare_set() {
  CddParameterSet set = parameter_set_from_table(resonant_preset());
  for (ManifoldDrive* m : {&set.S, &set.D}) {
    m->stage1.Omega = 0.0;
    m->stage2.Omega = 0.0;
  }
  resolve_detunings(set);
  return set;
}

}  // namespace

TEST_CASE("dressed splitting reproduces the resonant second-stage frequencies") {
  CHECK(dressed_splitting(46862.0, 0.0, kGFactorS) == doctest::Approx(0.5 * kGFactorS * 46862.0).epsilon(1e-15));
  CHECK(dressed_splitting(115446.0, 0.0, kGFactorD) == doctest::Approx(69286.879482).epsilon(1e-9));
  CHECK(std::abs(dressed_splitting(46862.0, 0.0, kGFactorS) - 46915.0) < 1.0);
  CHECK(std::abs(dressed_splitting(115446.0, 0.0, kGFactorD) - 69287.0) < 1.0);
  CHECK(dressed_splitting(2.0, 0.0, 1.0) == 1.0);
  CHECK_THROWS_AS(dressed_splitting(-1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("dressed splitting bounds") {
  for (double W : {0.0, 10.0, 1e3, 5e4}) {
    for (double D : {-3e3, -1.0, 0.0, 2.0, 7e4}) {
      for (double g : {0.5, 1.2, 2.0}) {
        const double w = dressed_splitting(W, D, g);
        CHECK(w >= std::max(0.5 * g * W, std::abs(D)));
      }
    }
  }
}

TEST_CASE("mixing angle") {
  CHECK(mixing_angle(0.0, 5.0) == 0.0);
  CHECK(mixing_angle(5.0, 5.0) == 1.0);
  const double w = dressed_splitting(6809.0, magic_detuning(6809.0, kGFactorD), kGFactorD);
  const double c = mixing_angle(magic_detuning(6809.0, kGFactorD), w);
  CHECK(c * c == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(c == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(mixing_angle(6.0, 5.0), DomainError);
}

TEST_CASE("zeeman sensitivity") {
  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  const MixingAngles resonant = mixing_angles(set);
  CHECK(std::abs(resonant.cos1_S) < 1e-12);
  CHECK(std::abs(resonant.cos1_D) < 1e-12);
  CHECK(zeeman_sensitivity(set, resonant) == doctest::Approx(0.0).epsilon(1e-9));

  CddParameterSet bare = bare_set();
  bare.target.m0_S = -0.5;
  bare.target.m0_D = -0.5;
  const double ref = zeeman_sensitivity(bare, mixing_angles(bare));
  CHECK(ref == doctest::Approx((kGFactorS - kGFactorD) * 0.5 * 13.9962449361).epsilon(1e-12));
  CHECK(ref == doctest::Approx(5.61).epsilon(1e-3));

  // Same quantum numbers, all angles forced to 1.
  MixingAngles ones;
  CddParameterSet tgt = set;
  tgt.target.m2_S = -0.5;
  tgt.target.m2_D = -0.5;
  CHECK(zeeman_sensitivity(tgt, ones) == doctest::Approx(ref).epsilon(1e-12));

  // Exactly linear in each cosine.
  MixingAngles a{0.3, -0.2, 0.7, 0.4};
  const double base = zeeman_sensitivity(tgt, a);
  MixingAngles b = a;
  b.cos1_S *= 2.0;
  b.cos1_D *= 2.0;
  CHECK(zeeman_sensitivity(tgt, b) == doctest::Approx(2.0 * base).epsilon(1e-12));
  MixingAngles d = a;
  d.cos2_D *= -3.0;
  d.cos2_S *= -3.0;
  CHECK(zeeman_sensitivity(tgt, d) == doctest::Approx(-3.0 * base).epsilon(1e-12));

  // A 1% mixing-angle mismatch on both stages of both manifolds gives
  // cos1 cos2 ~ 1e-4 of the bare response.
  MixingAngles mis{0.01, 0.01, 0.01, 0.01};
  const double r = std::abs(zeeman_sensitivity(tgt, mis) / zeeman_sensitivity(tgt, ones));
  CHECK(r == doctest::Approx(1e-4).epsilon(1e-9));
}

TEST_CASE("quadrupole suppression factor") {
  CHECK(qps_suppression_factor(0.0, 0.0) == 1.0);
  CHECK(qps_suppression_factor(0.0, 1.0 / std::sqrt(3.0)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(qps_suppression_factor(0.0, 1.0 / std::sqrt(3.0))) < 1e-15);
  for (double x : {-0.9, -0.3, 0.0, 0.2, 0.55, 1.0}) {
    for (double y : {-1.0, -0.4, 0.1, 0.8}) {
      CHECK(qps_suppression_factor(x, y) == qps_suppression_factor(y, x));
    }
  }
  CHECK(qps_suppression_factor(0.7, 0.2) != 0.0);
  const double theta_m = std::acos(1.0 / std::sqrt(3.0));
  const double f = qps_suppression_factor(0.0, std::cos(theta_m * 1.01));
  CHECK(std::abs(f) == doctest::Approx(3e-2).epsilon(0.25));
  CHECK(dressed_qps_weight(0.0, 0.0) == 0.25);
}

TEST_CASE("magic detuning") {
  CHECK(magic_detuning(6809.0, kGFactorD) == doctest::Approx(0.5 * kGFactorD * 6809.0 / std::sqrt(2.0)));
  CHECK(magic_detuning(6809.0, kGFactorD) == doctest::Approx(2889.618097).epsilon(1e-9));
  CHECK(magic_detuning(0.0, kGFactorD) == 0.0);
  const CddParameterSet magic = parameter_set_from_table(magic_preset());
  // The preset magic D frequency sits at the magic point of the
  // first-frame amplitude, half the lab value.
  CHECK(std::abs(magic.D.stage2.Delta) == doctest::Approx(magic_detuning_for(magic.D)).epsilon(2e-3));
  const double c2 = mixing_angles(magic).cos2_D;
  CHECK(c2 * c2 == doctest::Approx(1.0 / 3.0).epsilon(2e-3));
}

TEST_CASE("table presets resolve to zero first-stage detuning") {
  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  CHECK(set.B0 == doctest::Approx(356.93e-6).epsilon(1e-4));
  CHECK(std::abs(set.S.stage1.Delta) < 1e-6);
  CHECK(std::abs(set.D.stage1.Delta) < 1e-6);
  CHECK(set.D.bare_offset == doctest::Approx(-1324.16368).epsilon(1e-7));
  CHECK(std::abs(set.S.stage2.Delta) < 1.0);
  CHECK(std::abs(set.D.stage2.Delta) < 1.0);
  CHECK_NOTHROW(validate(set));
  CddParameterSet bad = set;
  bad.laser_Omega = 1000.0;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = set;
  bad.S.stage2.omega = 2e6;
  resolve_detunings(bad);
  CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("compensation detuning") {
  const CddParameterSet resonant = parameter_set_from_table(resonant_preset());
  CHECK(compensation_detuning_S(resonant) == resonant.S.stage2.Delta);

  // Detuned first stages leave a residual that the second S stage cancels.
  CddParameterSet set = parameter_set_from_table(magic_preset());
  retune(set.S, set.B0, 0.01 * 46915.0, set.S.stage2.Delta);
  retune(set.D, set.B0, 0.01 * 69287.0, set.D.stage2.Delta);
  const double d2 = compensation_detuning_S(set);
  CddParameterSet solved = set;
  retune(solved.S, solved.B0, solved.S.stage1.Delta, d2);
  CHECK(std::abs(zeeman_sensitivity(solved, mixing_angles(solved))) < 1e-3);

  // Symmetric toy: equal g and m, so the S stage must copy the D mixing angle.
  CddParameterSet toy = set;
  toy.S.manifold.g = toy.D.manifold.g = 1.0;
  toy.target.m2_S = toy.target.m2_D = 0.5;
  toy.S.stage1 = {1e6, 2000.0, 50.0, 0.0};
  toy.D.stage1 = {1e6, 2000.0, 50.0, 0.0};
  toy.S.stage2 = {900.0, 400.0, 0.0, 0.0};
  toy.D.stage2 = {900.0, 400.0, 37.5, 0.0};
  const double solved_toy = compensation_detuning_S(toy);
  CHECK(solved_toy == doctest::Approx(37.5).epsilon(3e-5));
  CHECK(std::abs(solved_toy - 37.5) < 1e-3);

  CddParameterSet stuck = set;
  retune(stuck.S, stuck.B0, 0.0, 0.0);
  CHECK_THROWS_AS(compensation_detuning_S(stuck), NumericError);
}

TEST_CASE("artificial transition frequency") {
  CddParameterSet bare = bare_set();
  CHECK(artificial_transition_frequency(bare) == 0.0);

  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  const double wS = dressed_splitting(3469.0 / 2, set.S.stage2.Delta, kGFactorS);
  const double wD = dressed_splitting(6809.0 / 2, set.D.stage2.Delta, kGFactorD);
  const double expected = (1.5 * set.D.stage1.Delta * 0 + 0.5 * 69287.0 + 0.5 * wD) -
                          (0.5 * 46915.0 + 0.5 * wS);
  CHECK(artificial_transition_frequency(set) == doctest::Approx(expected).epsilon(1e-12));

  CddParameterSet flipped = set;
  TargetTransition& t = flipped.target;
  t = {-t.m0_S, -t.m1_S, -t.m2_S, -t.m0_D, -t.m1_D, -t.m2_D};
  CHECK(artificial_transition_frequency(flipped) ==
        doctest::Approx(-artificial_transition_frequency(set)).epsilon(1e-12));
}

TEST_CASE("transition shift follows the analytic sensitivity") {
  CddParameterSet set = parameter_set_from_table(resonant_preset());
  retune(set.S, set.B0, 300.0, 120.0);
  retune(set.D, set.B0, -200.0, 80.0);
  const double slope = zeeman_sensitivity(set, mixing_angles(set));
  const double h = 1e-3;
  const double numeric = (transition_shift(set, {h}) - transition_shift(set, {-h})) / (2 * h);
  CHECK(numeric == doctest::Approx(slope).epsilon(1e-5));
  CHECK(transition_shift(set, {}) == 0.0);

  CddParameterSet bare = bare_set();
  CHECK(transition_shift(bare, {1.0}) == doctest::Approx(zeeman_sensitivity(bare, mixing_angles(bare))).epsilon(1e-9));
}
