#include <cmath>
#include <numeric>
#include <random>

#include "cddclock/allan.hpp"
#include "cddclock/decay.hpp"
#include "cddclock/errors.hpp"
#include "cddclock/linescan.hpp"
#include "cddclock/noise.hpp"
#include "cddclock/servo.hpp"
#include "cddclock/zeeman.hpp"
#include "doctest.h"

using namespace cddclock;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

struct Chain {
  TrapConfig trap = default_trap(5);
  IonCrystal crystal = equilibrium_positions(trap);
};

}  // namespace

TEST_CASE("flop probability") {
  DecayModel m;
  m.gamma = 0.29;
  m.Omega_L = 50.0;  // first pi time 10 ms
  CHECK(rabi_flop_probability(0.0, m) == 0.0);
  CHECK(rabi_flop_probability(1e3, m) == doctest::Approx(0.5).epsilon(1e-12));
  // Scalar oracle: 0.5 * (1 + exp(-0.01/1.168) * exp(-0.01^2 / (2 * 0.29^2))).
  CHECK(rabi_flop_probability(0.01, m) == doctest::Approx(0.995442807981).epsilon(1e-11));
  CHECK_THROWS_AS(rabi_flop_probability(-1.0, m), DomainError);

  m.Omega_L = 7.3;
  for (double t = 0.0; t < 3.0; t += 1e-3) {
    const double p = rabi_flop_probability(t, m);
    REQUIRE(p >= 0.0);
    REQUIRE(p <= 1.0);
  }
}

TEST_CASE("decay fit") {
  const std::vector<double> t = linspace(0.0, 0.8, 101);
  DecayModel truth;
  truth.gamma = 0.29;
  truth.Omega_L = 10.0;

  SUBCASE("noiseless round trip") {
    std::vector<double> p;
    for (double x : t) p.push_back(rabi_flop_probability(x, truth));
    const DecayFit f = fit_decay(t, p);
    CHECK(f.model.Omega_L == doctest::Approx(truth.Omega_L).epsilon(1e-6));
    CHECK(f.model.gamma == doctest::Approx(truth.gamma).epsilon(1e-6));
    CHECK(f.model.Gamma == kLifetimeD);
  }

  SUBCASE("binomial noise, 200 shots") {
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const DecayFit f = fit_decay(t, sample_flop(t, truth, 200, seed));
      CHECK(f.model.Omega_L == doctest::Approx(truth.Omega_L).epsilon(1e-2));
      if (std::abs(f.model.gamma / truth.gamma - 1.0) < 0.1) ++within;
    }
    CHECK(within == 20);
  }

  SUBCASE("pure exponential") {
    DecayModel e = truth;
    e.gamma = INFINITY;
    std::vector<double> p;
    for (double x : t) p.push_back(0.5 * (1.0 - std::cos(2 * M_PI * 10.0 * x) * std::exp(-x / kLifetimeD)));
    const DecayFit clean = fit_decay(t, p);
    CHECK(std::abs(clean.inv_gamma2) < 1e-6);
    const DecayFit noisy = fit_decay(t, sample_flop(t, e, 200, 7));
    CHECK(std::abs(noisy.inv_gamma2) < 3.0 * noisy.inv_gamma2_err);
  }

  CHECK_THROWS_AS(fit_decay(linspace(0, 1, 10), linspace(0, 1, 10)), DomainError);
  CHECK_THROWS_AS(fit_decay(t, linspace(0, 1, 50)), DomainError);
}

TEST_CASE("noise samples") {
  SUBCASE("quiet") {
    const NoiseSample s = sample_noise(quiet_noise(), 1.234, 3e-6);
    CHECK(s.dB == 0.0);
    CHECK(s.amp_S1 == 0.0);
    CHECK(s.amp_D2 == 0.0);
  }
  SUBCASE("single harmonic") {
    NoiseModel m = quiet_noise();
    m.mains = {{50.0, 10.0, 0.0}};
    CHECK(sample_noise(m, 5e-3, 0.0).dB == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("gradient profile") {
    NoiseModel m = quiet_noise();
    m.gradient_linear = 2.0;
    m.gradient_quadratic = 0.5;
    m.static_offset = 3.0;
    CHECK(sample_noise(m, 0.0, 4e-6).dB == doctest::Approx(3.0 + 8.0 + 8.0));
  }
  SUBCASE("random walk ensemble variance") {
    NoiseModel m = quiet_noise();
    m.slow_drift = 5.0;
    double var = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      m.seed = seed;
      const double x = sample_noise(m, 10.0, 0.0).dB;
      var += x * x / 100.0;
    }
    CHECK(var > 25.0 / 3.0);
    CHECK(var < 25.0 * 3.0);
  }
  SUBCASE("amplitude noise bounded and reproducible") {
    NoiseModel m;
    m.drive_amp_noise = 6e-5;
    m.amp_correlation = 0.05;
    const NoiseProcess a(m), b(m);
    double largest = 0.0;
    for (double t = 0.0; t < 30.0; t += 0.013) {
      const NoiseSample s = a.at(t, 1e-6);
      largest = std::max({largest, std::abs(s.amp_S1), std::abs(s.amp_S2), std::abs(s.amp_D1), std::abs(s.amp_D2)});
      const NoiseSample r = b.at(t, 1e-6);
      REQUIRE(s.dB == r.dB);
      REQUIRE(s.amp_D1 == r.amp_D1);
    }
    CHECK(largest <= 6e-5);
    CHECK(largest > 1e-5);
  }
  SUBCASE("query order does not matter") {
    NoiseModel m;
    const NoiseProcess fwd(m);
    const double early = fwd.at(0.5, 0.0).dB;
    const double late = fwd.at(40.0, 0.0).dB;
    const NoiseProcess rev(m);
    CHECK(rev.at(40.0, 0.0).dB == late);
    CHECK(rev.at(0.5, 0.0).dB == early);
  }
  SUBCASE("default mains broadening of the bare line") {
    CHECK(mains_broadening(NoiseModel{}, 5.6) == doctest::Approx(100.0).epsilon(0.05));
  }
  NoiseModel bad;
  bad.slow_drift = -1.0;
  CHECK_THROWS_AS(NoiseProcess{bad}, DomainError);
}

TEST_CASE("quadratic zeeman offset") {
  CHECK(quadratic_zeeman_offset(357e-6) == doctest::Approx(1.37).epsilon(1e-12));
  CHECK(quadratic_zeeman_offset(0.0) == 0.0);
  CHECK(quadratic_zeeman_offset(714e-6) == doctest::Approx(5.48).epsilon(1e-12));
  CHECK_THROWS_AS(quadratic_zeeman_offset(-1e-6), DomainError);
}

TEST_CASE("line scan") {
  const Chain chain;
  const CddParameterSet resonant = parameter_set_from_table(resonant_preset());
  const CddParameterSet magic = parameter_set_from_table(magic_preset());

  SUBCASE("no noise, no QPS, no gradient") {
    LineScanConfig cfg;
    cfg.detunings = linspace(-15.0, 15.0, 61);
    cfg.shots = 200;
    cfg.include_qps = false;
    const LineScanResult r = per_ion_line_scan(resonant, chain.crystal, chain.trap, quiet_noise(), cfg);
    REQUIRE(r.ions.size() == 5);
    for (const IonScan& ion : r.ions) {
      CHECK(ion.fit_ok);
      CHECK(ion.true_center == 0.0);
      CHECK(std::abs(ion.center) < 4.0 * ion.center_err);
      CHECK(ion.center_err < 0.3);
    }
  }

  SUBCASE("resonant set with QPS: quadratic profile closes the loop") {
    LineScanConfig cfg;
    cfg.detunings = linspace(15.0, 80.0, 131);
    cfg.shots = 400;
    const LineScanResult r = per_ion_line_scan(resonant, chain.crystal, chain.trap, quiet_noise(), cfg);
    std::vector<double> z, q;
    for (const IonScan& ion : r.ions) {
      REQUIRE(ion.fit_ok);
      z.push_back(ion.position);
      q.push_back(ion.qps);
    }
    const InhomogeneityFit input = inhomogeneity_fit(z, q);
    const InhomogeneityFit fitted = center_profile(r);
    CHECK(input.quadratic < 0.0);
    CHECK(fitted.quadratic == doctest::Approx(input.quadratic).epsilon(0.05));
  }

  SUBCASE("magic set with a linear field gradient") {
    NoiseModel n = quiet_noise();
    n.static_offset = 50.0;
    n.gradient_linear = 2.0;
    LineScanConfig cfg;
    cfg.detunings = linspace(-20.0, 15.0, 71);
    cfg.shots = 400;
    const LineScanResult r = per_ion_line_scan(magic, chain.crystal, chain.trap, n, cfg);
    for (const IonScan& ion : r.ions) REQUIRE(ion.fit_ok);
    const InhomogeneityFit f = center_profile(r);
    const double half = 1e6 * chain.crystal.positions.back();
    CHECK(std::abs(f.linear) * half > 3.0 * std::abs(f.quadratic) * half * half);
    std::vector<double> z, expected;
    for (const IonScan& ion : r.ions) {
      z.push_back(ion.position);
      expected.push_back(ion.qps + transition_shift(magic, {50.0 + 2.0 * 1e6 * ion.position}));
    }
    CHECK(f.linear == doctest::Approx(inhomogeneity_fit(z, expected).linear).epsilon(0.2));
  }

  SUBCASE("translation covariance") {
    LineScanConfig cfg;
    cfg.detunings = linspace(15.0, 80.0, 131);
    cfg.shots = 400;
    const LineScanResult a = per_ion_line_scan(resonant, chain.crystal, chain.trap, quiet_noise(), cfg);
    for (double& d : cfg.detunings) d += 0.37;
    const LineScanResult b = per_ion_line_scan(resonant, chain.crystal, chain.trap, quiet_noise(), cfg);
    for (std::size_t i = 0; i < a.ions.size(); ++i) {
      const double err = std::hypot(a.ions[i].center_err, b.ions[i].center_err);
      CHECK(std::abs(a.ions[i].center - b.ions[i].center) < 4.0 * err);
    }
  }

  SUBCASE("time-dependent noise is reproducible") {
    LineScanConfig cfg;
    cfg.detunings = linspace(-15.0, 15.0, 21);
    cfg.shots = 50;
    cfg.include_qps = false;
    cfg.seed = 3;
    const LineScanResult a = per_ion_line_scan(resonant, chain.crystal, chain.trap, NoiseModel{}, cfg);
    cfg.jobs = 4;
    const LineScanResult b = per_ion_line_scan(resonant, chain.crystal, chain.trap, NoiseModel{}, cfg);
    for (std::size_t i = 0; i < a.ions.size(); ++i) {
      CHECK(a.ions[i].excitation == b.ions[i].excitation);
      CHECK(a.ions[i].center == b.ions[i].center);
    }
  }

  LineScanConfig bad;
  bad.detunings = linspace(-1, 1, 11);
  bad.shots = 49;
  CHECK_THROWS_AS(per_ion_line_scan(resonant, chain.crystal, chain.trap, quiet_noise(), bad), DomainError);
}

TEST_CASE("peak fit falls back and flags") {
  const std::vector<double> d = linspace(-10, 10, 41);
  std::vector<double> flat(d.size(), 0.02);
  const PeakFit f = fit_peak(d, flat, pi_pulse_rabi(0.1), 0.1);
  CHECK_FALSE(f.ok);
  CHECK_FALSE(f.note.empty());
}

TEST_CASE("servo") {
  const Chain chain;
  const CddParameterSet resonant = parameter_set_from_table(resonant_preset());
  const CddParameterSet magic = parameter_set_from_table(magic_preset());

  SUBCASE("zero noise, perfect lock") {
    ServoConfig s;
    s.projection_noise = false;
    const ClockRun run = run_clock_servo(resonant, chain.crystal, chain.trap, quiet_noise(), s, 200 * s.cycle_time());
    REQUIRE(run.frequency.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      for (double f : run.frequency[i]) REQUIRE(f == run.frequency[i].front());
      CHECK(run.frequency[i].front() == doctest::Approx(run.true_offset[i]).epsilon(1e-12));
    }
    CHECK(run.timestamps.size() == 100);
    for (std::size_t k = 1; k < run.timestamps.size(); ++k) REQUIRE(run.timestamps[k] > run.timestamps[k - 1]);
  }

  SUBCASE("projection noise floor matches the two-point oracle") {
    TrapConfig one = default_trap(1);
    const IonCrystal ion = equilibrium_positions(one);
    ServoConfig s;
    s.seed = 11;
    const ClockRun run = run_clock_servo(resonant, ion, one, quiet_noise(), s, 40000 * s.cycle_time());
    const AllanResult a =
        overlapping_allan(fractional(run.frequency[0], kClockFrequency), run.pair_time, {1, 2, 4, 8, 16, 32, 64});
    double amp = 0.0;
    for (const AllanPoint& p : a.points) amp += p.adev * std::sqrt(p.tau) / a.points.size();
    // Oracle: pi pulse Omega = 1/(2T), probe at +-0.4/T. Closed-form slope of
    // the Rabi lineshape p(d) = O^2/W^2 sin^2(pi W T), W^2 = O^2 + d^2.
    const double T = 0.1, O = 0.5 / T, d = 0.4 / T, W = std::sqrt(O * O + d * d);
    const double p = O * O / (W * W) * std::pow(std::sin(M_PI * W * T), 2);
    const double dp = -2.0 * O * O * d / std::pow(W, 4) * std::pow(std::sin(M_PI * W * T), 2) +
                      O * O / (W * W) * std::sin(2.0 * M_PI * W * T) * M_PI * T * d / W;
    const double sigma_f = std::sqrt(2.0 * p * (1.0 - p)) / (2.0 * std::abs(dp));
    const double oracle = sigma_f / kClockFrequency * std::sqrt(2.0 * T / 0.33);
    CHECK(amp == doctest::Approx(oracle).epsilon(0.05));
    CHECK(qpn_instability(s, kClockFrequency) == doctest::Approx(oracle).epsilon(1e-6));
    const PowerLaw pl = fit_power_law(a);
    CHECK(pl.slope == doctest::Approx(-0.5).epsilon(0.1));
  }

  SUBCASE("unbiased on an injected static offset") {
    NoiseModel n = quiet_noise();
    n.static_offset = 100.0;
    ServoConfig s;
    s.include_qps = false;
    s.seed = 5;
    const ClockRun run = run_clock_servo(magic, chain.crystal, chain.trap, n, s, 4000 * s.cycle_time());
    for (std::size_t i = 0; i < run.frequency.size(); ++i) {
      CHECK(std::abs(run.true_offset[i]) > 1.0);
      const double m = mean(run.frequency[i]);
      const double sigma_f = qpn_instability(s, 1.0) / std::sqrt(run.pair_time);
      const double stat = sigma_f / std::sqrt(static_cast<double>(run.frequency[i].size()));
      CHECK(std::abs(m - run.true_offset[i]) < 5.0 * stat);
    }
  }

  SUBCASE("five ions with default noise") {
    ServoConfig s;
    s.seed = 2;
    const ClockRun run = run_clock_servo(resonant, chain.crystal, chain.trap, NoiseModel{}, s, 1000 * s.cycle_time());
    for (const auto& rec : run.frequency) {
      const AllanResult a = overlapping_allan(fractional(rec, kClockFrequency), run.pair_time, {1, 2, 4, 8});
      const double short_term = a.points.front().adev * std::sqrt(a.points.front().tau);
      CHECK(short_term > 1e-15);
      CHECK(short_term < 9e-15);
    }
    CHECK(run.true_offset.front() != doctest::Approx(run.true_offset[2]));
  }

  SUBCASE("deterministic and thread independent") {
    ServoConfig s;
    s.seed = 9;
    const ClockRun a = run_clock_servo(resonant, chain.crystal, chain.trap, NoiseModel{}, s, 200 * s.cycle_time());
    s.jobs = 3;
    const ClockRun b = run_clock_servo(resonant, chain.crystal, chain.trap, NoiseModel{}, s, 200 * s.cycle_time());
    CHECK(a.frequency == b.frequency);
  }

  SUBCASE("PMT readout gives one record") {
    ServoConfig s;
    s.readout = Readout::Pmt;
    const ClockRun run = run_clock_servo(resonant, chain.crystal, chain.trap, quiet_noise(), s, 200 * s.cycle_time());
    CHECK(run.frequency.size() == 1);
    CHECK(s.dead_time() == 100e-6);
  }

  SUBCASE("unlock is reported") {
    NoiseModel n = quiet_noise();
    n.slow_drift = 5000.0;
    ServoConfig s;
    s.gain = 0.01;
    s.include_qps = false;
    try {
      run_clock_servo(magic, chain.crystal, chain.trap, n, s, 2000 * s.cycle_time());
      FAIL("expected an unlock");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("unlocked") != std::string::npos);
      CHECK(std::string(e.what()).find("pair") != std::string::npos);
    }
  }

  ServoConfig s;
  CHECK_THROWS_AS(run_clock_servo(resonant, chain.crystal, chain.trap, quiet_noise(), s, 10 * s.cycle_time()),
                  DomainError);
  s.duty_cycle = 1.5;
  CHECK_THROWS_AS(validate(s), DomainError);
}

TEST_CASE("overlapping allan deviation") {
  SUBCASE("constant record") {
    const AllanResult a = overlapping_allan(std::vector<double>(100, 3e-15), 1.0, octave_factors(100));
    REQUIRE_FALSE(a.points.empty());
    for (const AllanPoint& p : a.points) CHECK(p.adev == 0.0);
  }
  SUBCASE("alternating four-point record") {
    const double x = 2.5;
    const AllanResult a = overlapping_allan({x, -x, x, -x}, 1.0, {1, 2});
    REQUIRE(a.points.size() == 1);
    CHECK(a.points[0].adev == doctest::Approx(x * std::sqrt(2.0)).epsilon(1e-14));
    REQUIRE(a.notes.size() == 1);
    CHECK(a.notes[0].find("skipped") != std::string::npos);
    // Frequency record in Hz normalised by the carrier.
    const AllanResult h = overlapping_allan(fractional({x, -x, x, -x}, 1e3), 1.0, {1});
    CHECK(h.points[0].adev == doctest::Approx(x * std::sqrt(2.0) / 1e3).epsilon(1e-14));
  }
  SUBCASE("white FM") {
    const double sigma = 4e-15;
    double slope = 0.0, amp = 0.0;
    for (int r = 0; r < 100; ++r) {
      std::mt19937_64 rng(1000 + r);
      std::normal_distribution<double> n(0.0, sigma);
      std::vector<double> y(4096);
      for (double& v : y) v = n(rng);
      const PowerLaw pl = fit_power_law(overlapping_allan(y, 1.0, {1, 2, 4, 8, 16, 32, 64}));
      slope += pl.slope / 100.0;
      amp += pl.amplitude / 100.0;
    }
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.05));
    CHECK(amp == doctest::Approx(sigma).epsilon(0.05));
  }
  SUBCASE("linear drift scales with tau") {
    std::vector<double> y(1000);
    for (int i = 0; i < 1000; ++i) y[i] = 1e-17 * i;
    const AllanResult a = overlapping_allan(y, 1.0, {1, 2, 4, 8, 16});
    for (std::size_t k = 1; k < a.points.size(); ++k) {
      CHECK(a.points[k].adev / a.points[k - 1].adev == doctest::Approx(2.0).epsilon(1e-9));
    }
    CHECK(fit_power_law(a).slope == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(overlapping_allan({1, 2, 3}, 0.0, {1}), DomainError);
  CHECK(octave_factors(100).back() == 32);
}
