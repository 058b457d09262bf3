#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cddclock/allan.hpp"
#include "cddclock/artifacts.hpp"
#include "cddclock/config.hpp"
#include "cddclock/errors.hpp"
#include "cddclock/floquet.hpp"
#include "cddclock/linescan.hpp"
#include "cddclock/preparation.hpp"
#include "cddclock/servo.hpp"
#include "cddclock/spin.hpp"
#include "cddclock/transfer.hpp"
#include "cddclock/waveform.hpp"

using namespace cddclock;
namespace fs = std::filesystem;

namespace {

struct Context {
  std::string subcommand;
  RunConfig cfg;
  fs::path out;
  std::string hash;

  [[nodiscard]] ArtifactHeader header(std::vector<std::string> notes = {}) const {
    return {subcommand, hash, std::move(notes)};
  }
  [[nodiscard]] std::string path(const std::string& name) const { return (out / name).string(); }
};

const char* manifold_name(ManifoldLabel l) { return l == ManifoldLabel::S ? "S" : "D"; }

void run_analyze(const Context& ctx) {
  const CddParameterSet set = build_parameter_set(ctx.cfg);
  const PhysicalConstants c = build_constants(ctx.cfg);
  const MixingAngles a = mixing_angles(set);
  CsvWriter w(ctx.path("analyze.csv"), ctx.header(), {"quantity", "manifold", "value", "unit"});
  auto row = [&](const char* q, const char* m, double v, const char* u) { w.cell(q).cell(m).cell(v).cell(u).end_row(); };
  for (ManifoldLabel l : {ManifoldLabel::S, ManifoldLabel::D}) {
    const ManifoldDrive& m = set.manifold(l);
    const char* n = manifold_name(l);
    row("bare_splitting", n, bare_splitting(m, set.B0, c), "Hz");
    row("omega_1", n, m.stage1.omega, "Hz");
    row("Delta_1", n, m.stage1.Delta, "Hz");
    row("dressed_splitting_1", n, first_stage_splitting(m), "Hz");
    row("omega_2", n, m.stage2.omega, "Hz");
    row("Delta_2", n, m.stage2.Delta, "Hz");
    row("dressed_splitting_2", n, second_stage_splitting(m), "Hz");
    row("magic_Delta_2", n, magic_detuning_for(m), "Hz");
  }
  row("cos_theta_1", "S", a.cos1_S, "1");
  row("cos_theta_2", "S", a.cos2_S, "1");
  row("cos_theta_1", "D", a.cos1_D, "1");
  row("cos_theta_2", "D", a.cos2_D, "1");
  row("B0", "-", set.B0, "T");
  row("artificial_transition", "-", artificial_transition_frequency(set), "Hz");
  // Reference: the undressed m = -1/2 -> m = -1/2 line.
  const double bare = c.mu_B_over_h_per_nT() * 0.5 * (set.S.manifold.g - set.D.manifold.g);
  row("bare_sensitivity", "-", bare, "Hz/nT");
  const double lin = zeeman_sensitivity(set, a, c);
  row("linear_sensitivity", "-", lin, "Hz/nT");

  // Quadratic fit of the dressed-model shift over the configured field grid.
  const int n = ctx.cfg.sensitivity_points;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) {
    const double dB = ctx.cfg.sensitivity_span * (2.0 * i / (n - 1) - 1.0);
    grid.push_back(dB);
    X(i, 0) = 1.0;
    X(i, 1) = dB;
    X(i, 2) = dB * dB;
    y(i) = transition_shift(set, {dB}, c);
  }
  const Eigen::Vector3d beta = X.colPivHouseholderQr().solve(y);
  row("fit_linear_sensitivity", "-", beta(1), "Hz/nT");
  row("fit_quadratic_sensitivity", "-", beta(2), "Hz/nT^2");
  row("qps_suppression_factor", "-", qps_suppression_factor(a.cos1_D, set.D.stage2.active() ? a.cos2_D : 1.0), "1");
  row("qps_coefficient", "-", dressed_qps_coefficient(set, quadrupole_moment_SI(ctx.cfg), c), "Hz/(V/m^2)");
  if (ctx.cfg.floquet) {
    FloquetOptions opt;
    opt.jobs = ctx.cfg.jobs;
    const SensitivityFit f = magnetic_sensitivity_numeric(set, grid, opt, c);
    row("floquet_linear_sensitivity", "-", f.linear, "Hz/nT");
    row("floquet_quadratic_sensitivity", "-", f.quadratic, "Hz/nT^2");
    row("floquet_fit_residual", "-", f.residual, "Hz");
  }
  w.close();
  std::printf("dressed splitting S: %.0f Hz\n", first_stage_splitting(set.S));
  std::printf("dressed splitting D: %.0f Hz\n", first_stage_splitting(set.D));
  std::printf("second-stage splitting S: %.1f Hz, D: %.1f Hz\n", second_stage_splitting(set.S),
              second_stage_splitting(set.D));
  std::printf("linear sensitivity: %.3g Hz/nT (bare %.3f Hz/nT)\n", lin, bare);
  std::printf("quadratic sensitivity: %.3g Hz/nT^2\n", beta(2));
}

void run_spectrum(const Context& ctx) {
  const CddParameterSet set = build_parameter_set(ctx.cfg);
  FloquetOptions opt;
  opt.jobs = ctx.cfg.jobs;
  const QuasiEnergySpectrum q = quasi_energies(set, opt, build_constants(ctx.cfg));
  CsvWriter w(ctx.path("spectrum.csv"), ctx.header(),
              {"manifold", "m", "quasi_energy_Hz", "overlap", "gap_Hz", "analytic_gap_Hz", "period_s"});
  for (const ManifoldSpectrum* s : {&q.S, &q.D}) {
    for (const QuasiEnergyLevel& l : s->levels) {
      w.cell(manifold_name(s->manifold)).cell(l.m).cell(l.energy).cell(l.overlap).cell(s->gap).cell(s->analytic_gap);
      w.cell(s->period.period).end_row();
    }
    std::printf("%s gap: %.6f Hz (analytic %.6f Hz)\n", manifold_name(s->manifold), s->gap, s->analytic_gap);
  }
  w.close();
}

void run_prepare(const Context& ctx) {
  const CddParameterSet set = build_parameter_set(ctx.cfg);
  PreparationOptions opt;
  opt.calibration.Omega_per_volt = ctx.cfg.Omega_per_volt;
  const Program p = preparation_program(set.S, build_sweeps(ctx.cfg), opt.calibration);
  StateVector psi{Eigen::VectorXcd::Zero(8), 0.0};
  psi.amplitudes(1) = 1.0;  // |S, -1/2>
  const PreparationResult r = simulate_adiabatic_preparation(set, p, psi, opt, build_constants(ctx.cfg));
  std::vector<std::string> notes = {"target_population: " + format_number(r.target_population),
                                    "duration_s: " + format_number(r.duration)};
  if (!r.warning.empty()) notes.push_back("warning: " + r.warning);
  CsvWriter w(ctx.path("prepare.csv"), ctx.header(notes), {"m", "population"});
  for (std::size_t i = 0; i < r.m.size(); ++i) w.cell(r.m[i]).cell(r.population[i]).end_row();
  w.close();
  std::printf("target population: %.6f after %.1f us\n", r.target_population, r.duration * 1e6);
  if (!r.warning.empty()) std::fprintf(stderr, "warning: %s\n", r.warning.c_str());
}

void run_crystal(const Context& ctx) {
  const TrapConfig trap = build_trap(ctx.cfg);
  const PhysicalConstants c = build_constants(ctx.cfg);
  const IonCrystal crystal = equilibrium_positions(trap, c);
  const GradientProfile g = axial_field_gradient(crystal, trap, c);
  const CddParameterSet set = build_parameter_set(ctx.cfg);
  const double k = dressed_qps_coefficient(set, quadrupole_moment_SI(ctx.cfg), c);
  CsvWriter w(ctx.path("crystal.csv"),
              ctx.header({"length_scale_m: " + format_number(crystal.length_scale),
                          "omega_z_rad_s: " + format_number(trap.omega_z)}),
              {"ion", "position_m", "position_scaled", "gradient_V_m2", "qps_Hz"});
  for (std::size_t i = 0; i < crystal.positions.size(); ++i) {
    w.cell(i).cell(crystal.positions[i]).cell(crystal.positions[i] / crystal.length_scale).cell(g.gradient[i]);
    w.cell(k * g.gradient[i]).end_row();
    std::printf("ion %zu: z = %.6g um, gradient %.6g V/m^2\n", i, crystal.positions[i] * 1e6, g.gradient[i]);
  }
  w.close();
}

void write_samples(const Context& ctx, const std::string& stem, const SampledWaveform& wf,
                   const std::vector<std::string>& notes) {
  if (ctx.cfg.format == "raw") {
    export_samples_raw(wf, ctx.path(stem + ".f32"));
    std::vector<std::string> n = notes;
    n.push_back("sample_rate: " + format_number(wf.sample_rate));
    n.push_back("samples: " + std::to_string(wf.samples.size()));
    n.push_back("format: little-endian float32");
    write_text(ctx.path(stem + ".f32.txt"), header_text(ctx.header(n)));
    return;
  }
  CsvWriter w(ctx.path(stem + ".csv"), ctx.header(notes), {"index", "value"});
  for (std::size_t i = 0; i < wf.samples.size(); ++i) w.cell(i).cell(wf.samples[i]).end_row();
  w.close();
}

void run_waveform(const Context& ctx) {
  const CddParameterSet set = build_parameter_set(ctx.cfg);
  CoilCalibration cal;
  cal.Omega_per_volt = ctx.cfg.Omega_per_volt;
  const double rate = ctx.cfg.sample_rate;
  const Program prep = preparation_program(set.S, build_sweeps(ctx.cfg), cal);
  const Program hold = hold_program(set.D, ctx.cfg.hold_duration * 1e-6, cal);
  const TransferFunctionModel coil_S = coil_model(set.S.stage1.omega, ctx.cfg.Q_S, ctx.cfg.zero_scale);
  const TransferFunctionModel coil_D = coil_model(set.D.stage1.omega, ctx.cfg.Q_D, ctx.cfg.zero_scale);

  CsvWriter tones(ctx.path("waveform_tones.csv"), ctx.header(),
                  {"coil", "segment", "tone", "amplitude_V", "f0_Hz", "chirp_Hz_s", "phase_rad", "drive_amplitude_V",
                   "drive_phase_rad"});
  for (const auto& [name, program, coil] :
       {std::tuple{"S", &prep, &coil_S}, std::tuple{"D", &hold, &coil_D}}) {
    const ToneProgram target = decompose(*program);
    const ToneProgram drive = precompensate(target, *coil);
    double mismatch = 0.0;
    for (double m : boundary_phase_mismatch(*program)) mismatch = std::max(mismatch, m);
    const std::vector<std::string> notes = {"coil: " + std::string(name),
                                            "duration_s: " + format_number(program->duration()),
                                            "boundary_phase_mismatch_rad: " + format_number(mismatch)};
    write_samples(ctx, std::string("waveform_") + name, sample(*program, rate), notes);
    write_samples(ctx, std::string("waveform_") + name + "_precompensated", sample(drive, rate), notes);
    for (std::size_t s = 0; s < target.segments.size(); ++s) {
      for (std::size_t k = 0; k < target.segments[s].tones.size(); ++k) {
        const Tone& t = target.segments[s].tones[k];
        const std::complex<double> d = drive.segments[s].tones[k].correction(t.f0) *
                                       std::polar(drive.segments[s].tones[k].amplitude, drive.segments[s].tones[k].phase);
        tones.cell(name).cell(s).cell(k).cell(t.amplitude).cell(t.f0).cell(t.chirp).cell(t.phase);
        tones.cell(std::abs(d)).cell(std::arg(d)).end_row();
      }
    }
    std::printf("coil %s: %zu segments, %.1f us, boundary mismatch %.3g rad\n", name, program->segments.size(),
                program->duration() * 1e6, mismatch);
  }
  tones.close();
}

void run_scan(const Context& ctx) {
  const CddParameterSet set = build_parameter_set(ctx.cfg);
  const TrapConfig trap = build_trap(ctx.cfg);
  const PhysicalConstants c = build_constants(ctx.cfg);
  const IonCrystal crystal = equilibrium_positions(trap, c);
  LineScanConfig sc;
  sc.detunings = scan_grid(ctx.cfg);
  sc.shots = ctx.cfg.shots;
  sc.probe_time = ctx.cfg.servo.probe_time;
  sc.cycle_time = ctx.cfg.servo.cycle_time();
  sc.include_qps = ctx.cfg.servo.include_qps;
  if (ctx.cfg.servo.qps_coefficient != 0.0) sc.qps_coefficient = ctx.cfg.servo.qps_coefficient;
  sc.theta_Q = quadrupole_moment_SI(ctx.cfg);
  sc.noise_points = ctx.cfg.servo.noise_points;
  sc.seed = ctx.cfg.seed;
  sc.jobs = ctx.cfg.jobs;
  const LineScanResult r = per_ion_line_scan(set, crystal, trap, ctx.cfg.noise, sc, c);

  CsvWriter w(ctx.path("scan.csv"), ctx.header(), {"ion", "position_um", "detuning_Hz", "excitation"});
  for (std::size_t i = 0; i < r.ions.size(); ++i) {
    for (std::size_t k = 0; k < r.detunings.size(); ++k) {
      w.cell(i).cell(r.ions[i].position * 1e6).cell(r.detunings[k]).cell(r.ions[i].excitation[k]).end_row();
    }
  }
  w.close();
  std::vector<std::string> notes = {"qps_coefficient_Hz_per_V_m2: " + format_number(r.qps_coefficient)};
  bool any_failed = false;
  for (const IonScan& ion : r.ions) any_failed = any_failed || !ion.fit_ok;
  if (r.ions.size() >= 3) {
    try {
      const InhomogeneityFit f = center_profile(r);
      notes.push_back("profile_linear_Hz_per_um: " + format_number(f.linear));
      notes.push_back("profile_quadratic_Hz_per_um2: " + format_number(f.quadratic));
      notes.push_back("profile_spread_Hz: " + format_number(f.spread));
      std::printf("center profile: linear %.4g Hz/um, quadratic %.4g Hz/um^2, spread %.4g Hz\n", f.linear,
                  f.quadratic, f.spread);
    } catch (const DomainError& e) {
      notes.push_back(std::string("profile: ") + e.what());
    }
  }
  CsvWriter fit(ctx.path("scan_fit.csv"), ctx.header(notes),
                {"ion", "position_um", "qps_Hz", "true_center_Hz", "center_Hz", "center_err_Hz", "fit_ok", "lineshape"});
  for (std::size_t i = 0; i < r.ions.size(); ++i) {
    const IonScan& ion = r.ions[i];
    fit.cell(i).cell(ion.position * 1e6).cell(ion.qps).cell(ion.true_center).cell(ion.center).cell(ion.center_err);
    fit.cell(ion.fit_ok ? 1 : 0).cell(ion.lineshape).end_row();
    if (!ion.fit_ok) std::fprintf(stderr, "warning: fit failed for ion %zu: %s\n", i, ion.note.c_str());
  }
  fit.close();
  (void)any_failed;
}

void write_adev(const Context& ctx, const std::string& name, const std::vector<std::vector<double>>& records,
                const std::vector<std::string>& labels, double tau0, bool hz) {
  std::vector<std::string> notes;
  std::vector<AllanResult> results;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const std::vector<double> y = hz ? fractional(records[r], ctx.cfg.clock_frequency) : records[r];
    results.push_back(overlapping_allan(y, tau0, octave_factors(y.size())));
    for (const std::string& n : results.back().notes) notes.push_back(labels[r] + ": " + n);
  }
  if (records.empty() || records.front().size() < 3) notes.push_back("record too short for any tau");
  CsvWriter w(ctx.path(name), ctx.header(notes), {"record", "tau_s", "adev", "error"});
  for (std::size_t r = 0; r < results.size(); ++r) {
    for (const AllanPoint& p : results[r].points) w.cell(labels[r]).cell(p.tau).cell(p.adev).cell(p.error).end_row();
    if (!results[r].points.empty()) {
      const AllanPoint& p = results[r].points.front();
      std::printf("%s: adev(%.3g s) = %.4g\n", labels[r].c_str(), p.tau, p.adev);
    }
  }
  w.close();
}

void run_clock(const Context& ctx) {
  const CddParameterSet set = build_parameter_set(ctx.cfg);
  const TrapConfig trap = build_trap(ctx.cfg);
  const PhysicalConstants c = build_constants(ctx.cfg);
  const IonCrystal crystal = equilibrium_positions(trap, c);
  ServoConfig s = ctx.cfg.servo;
  s.seed = ctx.cfg.seed;
  s.jobs = ctx.cfg.jobs;
  const ClockRun run = run_clock_servo(set, crystal, trap, ctx.cfg.noise, s, ctx.cfg.duration, c);

  std::vector<std::string> columns = {"t_s"};
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < run.frequency.size(); ++r) {
    labels.push_back(s.readout == Readout::Camera ? "ion" + std::to_string(r) : "crystal");
    columns.push_back(labels.back() + "_Hz");
  }
  std::vector<std::string> notes = {"seed: " + std::to_string(run.seed), "pair_time_s: " + format_number(run.pair_time)};
  for (std::size_t r = 0; r < run.true_offset.size(); ++r) {
    notes.push_back(labels[r] + "_true_offset_Hz: " + format_number(run.true_offset[r]));
  }
  if (!run.note.empty()) notes.push_back("note: " + run.note);
  CsvWriter w(ctx.path("clock.csv"), ctx.header(notes), columns);
  for (std::size_t k = 0; k < run.timestamps.size(); ++k) {
    w.cell(run.timestamps[k]);
    for (const auto& rec : run.frequency) w.cell(rec[k]);
    w.end_row();
  }
  w.close();
  write_adev(ctx, "clock_adev.csv", run.frequency, labels, run.pair_time, true);
}

void run_allan(const Context& ctx) {
  if (ctx.cfg.input.empty()) throw ConfigError("allan needs an input record (--input or allan.input)");
  const CsvTable t = read_csv(ctx.cfg.input);
  if (t.columns.size() < 2) throw DomainError("allan input needs a time column and at least one record");
  if (t.rows.size() < 2) throw DomainError("allan input needs at least two rows");
  const double tau0 = t.rows[1][0] - t.rows[0][0];
  if (!(tau0 > 0.0)) throw DomainError("allan input time column must increase");
  std::vector<std::vector<double>> records(t.columns.size() - 1);
  for (const auto& row : t.rows) {
    for (std::size_t j = 1; j < row.size(); ++j) records[j - 1].push_back(row[j]);
  }
  std::vector<std::string> labels(t.columns.begin() + 1, t.columns.end());
  write_adev(ctx, "allan.csv", records, labels, tau0, ctx.cfg.units == "hz");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded dynamical decoupling clock toolkit"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, preset, out_dir, input;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, ions;
  app.add_option("--config", config_path, "INI or JSON (.json) configuration file");
  app.add_option("--preset", preset, "parameter preset: resonant or magic");
  app.add_option("--out", out_dir, "output directory")->envname("CDDCLOCK_OUT");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--ions", ions, "number of ions in the crystal");
  app.add_option("--input", input, "record for the allan subcommand");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"analyze", "dressing report: splittings, mixing angles, sensitivities"},
      {"spectrum", "Floquet quasi-energies of both manifolds"},
      {"prepare", "adiabatic preparation fidelity"},
      {"scan", "per-ion line scans and center fits"},
      {"crystal", "ion positions, field gradients and quadrupole shifts"},
      {"waveform", "synthesized and pre-compensated coil waveforms"},
      {"clock", "two-point servo run and its Allan deviation"},
      {"allan", "Allan deviation of a frequency record"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Context ctx;
  ctx.subcommand = app.get_subcommands().front()->get_name();
  try {
    ctx.cfg = config_path.empty() ? parse_config_text("", preset) : parse_config(config_path, preset);
    if (seed) ctx.cfg.seed = *seed;
    if (jobs) ctx.cfg.jobs = *jobs;
    if (ions) ctx.cfg.ions = *ions;
    if (!input.empty()) ctx.cfg.input = input;
    if (!out_dir.empty()) ctx.cfg.output_dir = out_dir;
    ctx.cfg.noise.seed = ctx.cfg.seed;
    validate(ctx.cfg);
    ctx.out = ctx.cfg.output_dir;
    fs::create_directories(ctx.out);
    ctx.hash = config_hash(ctx.cfg);
    write_text(ctx.path(ctx.subcommand + "_config.ini"), header_text(ctx.header()) + snapshot(ctx.cfg));

    if (ctx.subcommand == "analyze") run_analyze(ctx);
    if (ctx.subcommand == "spectrum") run_spectrum(ctx);
    if (ctx.subcommand == "prepare") run_prepare(ctx);
    if (ctx.subcommand == "scan") run_scan(ctx);
    if (ctx.subcommand == "crystal") run_crystal(ctx);
    if (ctx.subcommand == "waveform") run_waveform(ctx);
    if (ctx.subcommand == "clock") run_clock(ctx);
    if (ctx.subcommand == "allan") run_allan(ctx);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: invalid input: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: numeric: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
