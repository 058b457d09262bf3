#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cddclock/allan.hpp"
#include "cddclock/crystal.hpp"
#include "cddclock/decay.hpp"
#include "cddclock/dressing.hpp"
#include "cddclock/floquet.hpp"
#include "cddclock/noise.hpp"
#include "cddclock/preparation.hpp"
#include "cddclock/servo.hpp"
#include "cddclock/spin.hpp"
#include "cddclock/transfer.hpp"
#include "cddclock/waveform.hpp"

using namespace cddclock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string cli_path;

StateVector bare_ground() {
  StateVector psi{Eigen::VectorXcd::Zero(8), 0.0};
  psi.amplitudes(1) = 1.0;
  return psi;
}

double wrap_signed(double x) { return std::remainder(x, 2 * M_PI); }

void check_splittings(Outcome& o) {
  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  const double s = first_stage_splitting(set.S), d = first_stage_splitting(set.D);
  o.detail << "S " << s << " Hz, D " << d << " Hz";
  o.require(std::abs(s - 46915.0) < 1.0, "S within 1 Hz of 46915");
  o.require(std::abs(d - 69287.0) < 1.0, "D within 1 Hz of 69287");
}

void check_quasi_energy_gaps(Outcome& o) {
  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  const QuasiEnergySpectrum q = quasi_energies(set);
  const double rs = q.S.gap / q.S.analytic_gap - 1.0, rd = q.D.gap / q.D.analytic_gap - 1.0;
  o.detail << "table rel " << rs << " / " << rd;
  o.require(std::abs(rs) < 1e-2 && std::abs(rd) < 1e-2, "table set within 1%");

  // Drive frequencies 100x higher, splittings unchanged.
  CddParameterSet sc = set;
  sc.B0 *= 100;
  sc.D.bare_offset *= 100;
  sc.S.stage1.omega *= 100;
  sc.D.stage1.omega *= 100;
  resolve_detunings(sc);
  const QuasiEnergySpectrum h = quasi_energies(sc);
  const double hs = h.S.gap / h.S.analytic_gap - 1.0, hd = h.D.gap / h.D.analytic_gap - 1.0;
  o.detail << ", scaled rel " << hs << " / " << hd;
  o.require(std::abs(hs) < 1e-4 && std::abs(hd) < 1e-4, "scaled set within 0.01%");
}

void check_sensitivity(Outcome& o) {
  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  const SensitivityFit f = magnetic_sensitivity_numeric(set, {-10, -5, -2.5, 0, 2.5, 5, 10});
  const double bare = 0.5 * (kGFactorS - kGFactorD) * PhysicalConstants{}.mu_B_over_h_per_nT();
  o.detail << "linear " << f.linear << " Hz/nT (bare " << std::abs(bare) << "), quadratic " << f.quadratic
           << " Hz/nT^2";
  o.require(std::abs(f.linear) < 1e-3, "|linear| < 1e-3 Hz/nT");
  o.require(f.quadratic < 0.0, "quadratic negative");
  o.require(std::abs(f.quadratic) > 1.2e-5 && std::abs(f.quadratic) < 1.2e-3, "quadratic of order 1e-4");
  o.require(!f.flagged, "fit residual small");
}

void check_magic_point(Outcome& o) {
  const CddParameterSet resonant = parameter_set_from_table(resonant_preset());
  const CddParameterSet magic = parameter_set_from_table(magic_preset());
  const double theta = default_quadrupole_moment();
  const MagicSearchResult r = numeric_magic_search(magic, 7.6e6, -2500.0, -700.0);
  o.detail << "root " << r.Delta2_D << " Hz";

  const TrapConfig trap = default_trap(5);
  const IonCrystal crystal = equilibrium_positions(trap);
  const GradientProfile g = axial_field_gradient(crystal, trap);
  auto spread = [&](const CddParameterSet& set) {
    const double coef = qps_gradient_coefficient(set, theta);
    std::vector<double> shift;
    for (double x : g.gradient) shift.push_back(coef * x);
    return std::abs(inhomogeneity_fit(crystal.positions, shift).quadratic);
  };
  CddParameterSet at_root = magic;
  at_root.D.stage2.Delta = r.Delta2_D;
  const double qr = spread(resonant), qm = spread(at_root);
  o.detail << ", quadratic " << qr << " -> " << qm << " Hz/um^2 (x" << qr / qm << ")";
  o.require(r.Delta2_D > -2500.0 && r.Delta2_D < -700.0, "root inside bracket");
  o.require(qr >= 12.0 * qm, "suppressed at least 12x");

  const double analytic = qps_suppression_factor(0.0, 1.0 / std::sqrt(3.0));
  o.detail << ", analytic factor " << analytic;
  o.require(std::abs(analytic) < 1e-15, "analytic magic factor vanishes");
}

void check_preparation(Outcome& o) {
  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  const SweepSettings sw = sweeps_from_table(resonant_preset());
  const PreparationResult r = simulate_adiabatic_preparation(set, preparation_program(set.S, sw), bare_ground());
  SweepSettings fast = sw;
  fast.t_sw1 *= 0.01;
  fast.t_sw2 *= 0.01;
  const PreparationResult f = simulate_adiabatic_preparation(set, preparation_program(set.S, fast), bare_ground());
  o.detail << "target " << r.target_population << ", 100x faster " << f.target_population;
  o.require(r.target_population > 0.97, "table sweeps above 0.97");
  o.require(f.target_population < 0.5, "fast sweeps below 0.5");
}

void check_decay(Outcome& o) {
  std::vector<double> t(101);
  for (int i = 0; i <= 100; ++i) t[i] = 0.8 * i / 100.0;
  DecayModel truth;
  truth.gamma = 0.29;
  truth.Omega_L = 10.0;
  int within = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DecayFit f = fit_decay(t, sample_flop(t, truth, 200, seed));
    const double rel = std::abs(f.model.gamma / truth.gamma - 1.0);
    worst = std::max(worst, rel);
    if (rel < 0.1) ++within;
  }
  o.detail << within << "/20 seeds within 10%, worst " << worst;
  o.require(within == 20, "gamma within 10% on every seed");
}

void check_crystal(Outcome& o) {
  auto trap = [](int n, double fz) {
    TrapConfig t;
    t.N = n;
    t.omega_z = 2 * M_PI * fz;
    t.omega_r = 2 * M_PI * 3e6;
    return t;
  };
  const IonCrystal two = equilibrium_positions(trap(2, 682.8e3));
  const IonCrystal five = equilibrium_positions(trap(5, 682.8e3));
  const IonCrystal stiff = equilibrium_positions(trap(5, 2 * 682.8e3));
  const double u2 = two.positions[1] / two.length_scale, u5 = five.positions[4] / five.length_scale;
  const double ratio = stiff.positions[4] / five.positions[4];
  o.detail << "N=2 " << u2 << ", N=5 " << u5 << ", scaling " << ratio;
  o.require(std::abs(u2 - 0.62996) < 1e-5 && std::abs(u2 - std::pow(0.5, 2.0 / 3.0)) < 1e-9, "N=2 positions");
  o.require(std::abs(u5 - 1.7429) < 1e-4, "N=5 outer ion");
  o.require(std::abs(two.positions[0] + two.positions[1]) <= 1e-12 * two.length_scale, "N=2 symmetric");
  o.require(std::abs(ratio - std::pow(2.0, -2.0 / 3.0)) < 1e-9, "omega_z^(-2/3) scaling");
}

double coil_round_trip(const TransferFunctionModel& coil, const Program& hold, double& worst_phase) {
  const ToneProgram target = decompose(hold);
  const ToneProgram drive = precompensate(target, coil);
  double f1 = 0.0;
  for (const Tone& t : target.segments[0].tones) f1 = std::max(f1, t.f0);
  const double dt = 1.0 / (200.0 * f1);
  const std::vector<double> y = filter_time_domain(coil, [&](double t) { return drive.value(t); }, 150e-6, dt);
  const double t0 = 20e-6;
  const std::vector<double> window(y.begin() + static_cast<long>(t0 / dt), y.end());
  std::vector<double> freqs;
  for (const Tone& tone : target.segments[0].tones) freqs.push_back(tone.f0);
  const auto est = fit_tones(window, 1.0 / dt, std::round(t0 / dt) * dt, freqs);
  double worst_amp = 0.0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const Tone& tone = target.segments[0].tones[k];
    worst_amp = std::max(worst_amp, std::abs(est[k].amplitude / tone.amplitude - 1.0));
    worst_phase = std::max(worst_phase, std::abs(wrap_signed(est[k].phase - tone.phase)) * 180 / M_PI);
  }
  return worst_amp;
}

void check_waveform(Outcome& o) {
  const CddParameterSet set = parameter_set_from_table(resonant_preset());
  double ps = 0.0, pd = 0.0;
  const double as = coil_round_trip(coil_model(set.S.stage1.omega, 8.59), hold_program(set.S, 150e-6), ps);
  const double ad = coil_round_trip(coil_model(set.D.stage1.omega, 15.95), hold_program(set.D, 150e-6), pd);
  SweepSettings sw = sweeps_from_table(resonant_preset());
  sw.hold2 = 200e-6;
  const Program full = preparation_program(set.S, sw);
  double mismatch = 0.0;
  for (double m : boundary_phase_mismatch(full)) mismatch = std::max(mismatch, m);
  o.detail << "S amp " << as << " phase " << ps << " deg, D amp " << ad << " phase " << pd
           << " deg, stitch mismatch " << mismatch << " rad";
  o.require(as < 0.01 && ps < 1.0, "S coil within 1% and 1 deg");
  o.require(ad < 0.01 && pd < 1.0, "D coil within 1% and 1 deg");
  o.require(full.segments.size() == 4 && mismatch < 1e-9, "4-segment stitch continuous");
}

void check_clock(Outcome& o) {
  std::vector<double> slopes;
  for (int r = 0; r < 100; ++r) {
    std::mt19937_64 rng = seeded_rng(500 + r, 0, 0);
    std::normal_distribution<double> n(0.0, 3e-15);
    std::vector<double> y(4096);
    for (double& v : y) v = n(rng);
    slopes.push_back(fit_power_law(overlapping_allan(y, 1.0, {1, 2, 4, 8, 16, 32, 64})).slope);
  }
  const double slope = std::accumulate(slopes.begin(), slopes.end(), 0.0) / slopes.size();
  o.detail << "white FM slope " << slope;
  o.require(std::abs(slope + 0.5) < 0.025, "white FM slope -1/2 within 5%");

  const TrapConfig trap = default_trap(5);
  const IonCrystal crystal = equilibrium_positions(trap);
  const CddParameterSet resonant = parameter_set_from_table(resonant_preset());
  ServoConfig s;
  s.seed = 3;
  const ClockRun run = run_clock_servo(resonant, crystal, trap, NoiseModel{}, s, 1000 * s.cycle_time());
  double lo = 1.0, hi = 0.0;
  for (const auto& rec : run.frequency) {
    const AllanResult a = overlapping_allan(fractional(rec, kClockFrequency), run.pair_time, {1, 2, 4, 8});
    const double v = a.points.front().adev * std::sqrt(a.points.front().tau);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  o.detail << ", per-ion short-term " << lo << " .. " << hi << " /sqrt(Hz)";
  o.require(lo > 1e-15 && hi < 9e-15, "five ions within 3x of 3e-15");

  NoiseModel n = quiet_noise();
  n.static_offset = 100.0;
  ServoConfig b;
  b.include_qps = false;
  b.seed = 4;
  const CddParameterSet magic = parameter_set_from_table(magic_preset());
  const ClockRun biased = run_clock_servo(magic, crystal, trap, n, b, 4000 * b.cycle_time());
  double worst = 0.0;
  for (std::size_t i = 0; i < biased.frequency.size(); ++i) {
    const auto& rec = biased.frequency[i];
    const double m = std::accumulate(rec.begin(), rec.end(), 0.0) / rec.size();
    const double stat = qpn_instability(b, 1.0) / std::sqrt(biased.pair_time) / std::sqrt(double(rec.size()));
    worst = std::max(worst, std::abs(m - biased.true_offset[i]) / stat);
  }
  o.detail << ", static-offset bias " << worst << " sigma";
  o.require(worst < 5.0, "no bias on an injected offset");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const fs::path& out, const std::string& args) {
  const std::string cmd = "\"" + cli_path + "\" --out \"" + out.string() + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

void check_reproducibility(Outcome& o) {
  if (cli_path.empty()) {
    o.require(false, "no CLI path given");
    return;
  }
  const fs::path root = fs::temp_directory_path() / "cddclock_acceptance";
  fs::remove_all(root);
  const fs::path run = root / "run", a = root / "a";
  const std::vector<std::string> commands = {"analyze", "crystal", "scan --seed 7", "clock --seed 7", "waveform"};
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& c : commands) o.require(run_cli(run, c) == 0, c + " exits 0");
    o.require(run_cli(run, "allan --input \"" + (run / "clock.csv").string() + "\"") == 0, "allan exits 0");
    if (pass == 0) fs::rename(run, a);
  }
  const fs::path b = run;
  int files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    if (slurp(e.path()) != slurp(b / e.path().filename())) {
      ++differ;
      o.require(false, e.path().filename().string() + " differs");
    }
  }
  o.detail << files << " artifacts compared, " << differ << " differ";
  o.require(files > 0, "artifacts written");
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) cli_path = argv[1];
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"first-stage splittings", check_splittings},
      {"quasi-energy gaps", check_quasi_energy_gaps},
      {"magnetic sensitivity", check_sensitivity},
      {"magic point and QPS suppression", check_magic_point},
      {"adiabatic preparation", check_preparation},
      {"decay fit", check_decay},
      {"crystal positions", check_crystal},
      {"coil round trip and stitching", check_waveform},
      {"clock instability", check_clock},
      {"reproducible artifacts", check_reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
