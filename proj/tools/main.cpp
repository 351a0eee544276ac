// atomchip: command-line front end for the chip-trap transport toolkit.
//
// One binary, one subcommand per module. Every run writes its data files
// plus a JSON manifest (config hash, SI-converted flags, outputs) next to
// them; single-worker runs are bitwise reproducible.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "atomchip/chip_model.hpp"
#include "atomchip/classical_sim.hpp"
#include "atomchip/config_file.hpp"
#include "atomchip/constants.hpp"
#include "atomchip/csv.hpp"
#include "atomchip/errors.hpp"
#include "atomchip/gpe_sim.hpp"
#include "atomchip/mode_analysis.hpp"
#include "atomchip/scaling_sim.hpp"
#include "atomchip/sequence.hpp"
#include "atomchip/sta_design.hpp"

using json = nlohmann::ordered_json;
using namespace atomchip;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- utilities

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open " + tmp);
    out << text;
    if (!out) throw Error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot rename " + tmp + " to " + path);
}

std::vector<double> parse_range(const std::string& spec, double scale) {
  double a = 0, b = 0, step = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
      step <= 0 || b < a)
    throw UsageError("range must be 'lo:hi:step' with step > 0, got '" + spec +
                     "'");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    double v = a + i * step;
    if (v > b + 1e-9 * step) break;
    out.push_back(v * scale);
  }
  return out;
}

// Run context: parsed config plus manifest bookkeeping.
struct Ctx {
  std::string config_path;
  ParsedConfig cfg;
  std::string config_hash;
  std::string out_dir = ".";
  int workers = 1;
  std::string started;

  json flags = json::object(); // SI-converted flag echo
  std::vector<std::string> outputs;

  std::string path(const std::string& name) const {
    return out_dir.empty() || out_dir == "." ? name : out_dir + "/" + name;
  }
  void emit_csv(const CsvWriter& csv, const std::string& name) {
    csv.write_file(path(name));
    outputs.push_back(name);
  }
  void emit_json(const json& j, const std::string& name) {
    write_text_atomic(path(name), j.dump(2) + "\n");
    outputs.push_back(name);
  }
  void manifest(const std::string& subcommand) {
    json m;
    m["config_hash"] = config_hash;
    m["config_path"] = config_path;
    m["subcommand"] = subcommand;
    m["flags"] = flags;
    m["code_version"] = kVersion;
    m["started_at"] = started;
    m["finished_at"] = iso_now();
    m["outputs"] = outputs;
    write_text_atomic(path(subcommand + "_manifest.json"), m.dump(2) + "\n");
  }
};

Ctx make_ctx(const std::string& config_flag, const std::string& out_dir,
             int workers) {
  Ctx ctx;
  ctx.config_path = config_flag;
  if (ctx.config_path.empty()) {
    const char* env = std::getenv("ATOMCHIP_STA_CONFIG");
    ctx.config_path = env ? env : "configs/quantus_z.cfg";
  }
  std::ifstream in(ctx.config_path, std::ios::binary);
  if (!in) throw ParseError(ctx.config_path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  ctx.config_hash = fnv1a_hex(buf.str());
  ctx.cfg = parse_config_text(buf.str(), ctx.config_path);
  ctx.out_dir = out_dir;
  if (!ctx.out_dir.empty() && ctx.out_dir != ".")
    std::filesystem::create_directories(ctx.out_dir);
  ctx.workers = workers;
  ctx.started = iso_now();
  return ctx;
}

TrapTables make_tables(const Ctx& ctx) {
  return trap_tables(ctx.cfg.chip, ctx.cfg.species, ctx.cfg.defaults.bias_lo,
                     ctx.cfg.defaults.bias_hi, ctx.cfg.defaults.table_samples,
                     ctx.workers);
}

// Shared ramp flags for the subcommands that design a transport.
struct RampOpts {
  std::string ansatz = "chirped";
  double tf_ms = 75.0;
  double a = default_chirp_a;
  double b = default_chirp_b;
  double zi_mm = 0.0; // 0: derive from bias_start_G
  double zf_mm = 0.0;
  double bias_start_G = 21.5;
  double bias_end_G = 4.5;
  int steps = 0; // 0: 10 us grid

  void add_flags(CLI::App* app) {
    app->add_option("--ansatz", ansatz, "Trajectory ansatz")
        ->check(CLI::IsMember({"poly9", "chirped", "linear"}));
    app->add_option("--tf-ms", tf_ms, "Ramp duration [ms]");
    app->add_option("--a", a, "Chirp parameter a");
    app->add_option("--b", b, "Chirp parameter b");
    app->add_option("--zi-mm", zi_mm, "Start trap position [mm]; 0 = from --bias-start-G");
    app->add_option("--zf-mm", zf_mm, "Final trap position [mm]; 0 = from --bias-end-G");
    app->add_option("--bias-start-G", bias_start_G, "Start bias [G]");
    app->add_option("--bias-end-G", bias_end_G, "End bias [G]");
    app->add_option("--steps", steps, "Schedule grid points; 0 = 10 us spacing");
  }

  TrajectoryAnsatz ansatz_for(const TrapTables& tables) const {
    TrajectoryAnsatz an;
    an.kind = ansatz == "poly9"    ? AnsatzKind::Polynomial9
              : ansatz == "linear" ? AnsatzKind::Linear
                                   : AnsatzKind::ChirpedSine;
    an.chirp_a = a;
    an.chirp_b = b;
    an.t_f = tf_ms * 1e-3;
    an.z_i = zi_mm != 0.0 ? zi_mm * 1e-3 : tables.zt_of_bias(bias_start_G * 1e-4);
    an.z_f = zf_mm != 0.0 ? zf_mm * 1e-3 : tables.zt_of_bias(bias_end_G * 1e-4);
    return an;
  }
  int n_steps() const {
    return steps > 0 ? steps : (int)std::lround(tf_ms * 1e-3 / 1e-5) + 1;
  }
  json to_json(const TrajectoryAnsatz& an) const {
    return {{"ansatz", ansatz},     {"t_f_s", an.t_f},
            {"chirp_a", an.chirp_a}, {"chirp_b", an.chirp_b},
            {"z_i_m", an.z_i},      {"z_f_m", an.z_f},
            {"steps", n_steps()}};
  }
};

// ------------------------------------------------------------- subcommands

int cmd_trap_tables(Ctx& ctx) {
  auto tables = make_tables(ctx);
  ctx.flags["bias_lo_T"] = ctx.cfg.defaults.bias_lo;
  ctx.flags["bias_hi_T"] = ctx.cfg.defaults.bias_hi;
  ctx.flags["samples"] = ctx.cfg.defaults.table_samples;

  CsvWriter csv({"B_bias_G", "z_t_mm", "nu_x_Hz", "nu_y_Hz", "nu_z_Hz",
                 "L3_mm", "theta_deg"});
  for (const auto& r : tables.rows)
    csv.row({r.bias * 1e4, r.z_t * 1e3, r.nu_x, r.nu_y, r.nu_z, r.L3 * 1e3,
             r.theta * 180.0 / M_PI});
  ctx.emit_csv(csv, "trap_tables.csv");
  ctx.manifest("trap-tables");
  return 0;
}

int cmd_design_ramp(Ctx& ctx, const RampOpts& ropt) {
  auto tables = make_tables(ctx);
  auto an = ropt.ansatz_for(tables);
  ctx.flags = ropt.to_json(an);
  auto sched = design_ramp(an, tables, ropt.n_steps());

  auto [chi, chi_max] = chi_profile(sched, tables.L3_of_zt);
  CsvWriter csv({"t_s", "z_a_m", "z_t_m", "omega_z_rad_s", "B_bias_G", "chi"});
  for (size_t i = 0; i < sched.size(); ++i)
    csv.row({sched.times[i], sched.z_a[i], sched.z_t[i], sched.omega_z[i],
             sched.bias[i] * 1e4, chi[i]});
  ctx.emit_csv(csv, "ramp.csv");
  ctx.emit_json({{"chi_max", chi_max},
                 {"bias_start_G", sched.bias.front() * 1e4},
                 {"bias_end_G", sched.bias.back() * 1e4}},
                "ramp_summary.json");
  ctx.manifest("design-ramp");
  return 0;
}

int cmd_simulate_classical(Ctx& ctx, const RampOpts& ropt,
                           const std::string& model_name, double hold_ms,
                           const std::string& scan_tf, double delta_bias_mG,
                           double delta_tf_ms) {
  auto tables = make_tables(ctx);
  auto an = ropt.ansatz_for(tables);
  TrapModel model =
      model_name == "harmonic" ? TrapModel::Harmonic : TrapModel::Anharmonic;
  ctx.flags = ropt.to_json(an);
  ctx.flags["model"] = model_name;
  ctx.flags["hold_s"] = hold_ms * 1e-3;
  ctx.flags["delta_bias_T"] = delta_bias_mG * 1e-7;
  ctx.flags["delta_tf_s"] = delta_tf_ms * 1e-3;

  auto sched = design_ramp(an, tables, ropt.n_steps());
  auto res = integrate(sched, model, hold_ms * 1e-3);

  CsvWriter csv({"t_s", "z_m", "v_m_s", "z_t_m"});
  for (const auto& s : res.trajectory)
    csv.row({s.t, s.z, s.v, sample_series(sched.times, sched.z_t, s.t)});
  ctx.emit_csv(csv, "classical_trajectory.csv");

  json metrics = {{"residual_amplitude_m", res.metrics.residual_amplitude},
                  {"max_offset_m", res.metrics.max_offset},
                  {"anharmonicity_pct", res.metrics.anharmonicity_pct},
                  {"ramp_tf_s", res.metrics.ramp_tf}};
  if (delta_bias_mG != 0.0)
    metrics["delta_bias_residual_m"] = perturbation_response(
        sched, tables, model, delta_bias_mG * 1e-7, 0.0, hold_ms * 1e-3);
  if (delta_tf_ms != 0.0)
    metrics["delta_tf_residual_m"] = perturbation_response(
        sched, tables, model, 0.0, delta_tf_ms * 1e-3, hold_ms * 1e-3);
  ctx.emit_json(metrics, "classical_metrics.json");

  if (!scan_tf.empty()) {
    auto tf_values = parse_range(scan_tf, 1e-3);
    ctx.flags["scan_tf_s"] = tf_values;
    auto rows = ramp_time_scan(an, tables, tf_values, model, hold_ms * 1e-3,
                               ctx.workers);
    CsvWriter scan({"tf_s", "residual_amplitude_m", "max_offset_m",
                    "anharmonicity_pct"});
    for (const auto& m : rows)
      scan.row({m.ramp_tf, m.residual_amplitude, m.max_offset,
                m.anharmonicity_pct});
    ctx.emit_csv(scan, "classical_scan.csv");
  }
  ctx.manifest("simulate-classical");
  return 0;
}

int cmd_simulate_scaling(Ctx& ctx, const RampOpts& ropt, double hold_ms) {
  auto tables = make_tables(ctx);
  auto an = ropt.ansatz_for(tables);
  ctx.flags = ropt.to_json(an);
  ctx.flags["hold_s"] = hold_ms * 1e-3;

  auto sched = design_ramp(an, tables, ropt.n_steps());
  Vec3 w0{sched.omega_x.front(), sched.omega_y.front(), sched.omega_z.front()};
  Vec3 wf{sched.omega_x.back(), sched.omega_y.back(), sched.omega_z.back()};

  TrapFrequencySchedule fs;
  fs.segments.push_back({an.t_f, 5e-6,
                         [&sched](double t) {
                           TrapSnapshot s = trap_snapshot(sched, t);
                           return Vec3{s.omega_x, s.omega_y, s.omega_z};
                         },
                         "transport"});
  if (hold_ms > 0)
    fs.segments.push_back(
        {hold_ms * 1e-3, 5e-6, [wf](double) { return wf; }, "hold"});

  auto series = integrate_scaling(fs, w0, 1e-4);
  Vec3 R0 = initial_tf_radii(ctx.cfg.species, w0);
  auto widths = width_series(series, R0);

  CsvWriter csv({"t_s", "lambda_x", "lambda_y", "lambda_z", "Rx_m", "Ry_m",
                 "Rz_m"});
  for (size_t i = 0; i < series.times.size(); ++i)
    csv.row({series.times[i], series.lambda[i][0], series.lambda[i][1],
             series.lambda[i][2], R0[0] * series.lambda[i][0],
             R0[1] * series.lambda[i][1], R0[2] * series.lambda[i][2]});
  ctx.emit_csv(csv, "scaling.csv");

  Vec3 rates = fit_expansion_rates(series.times, widths);
  auto T = expansion_temperature(ctx.cfg.species, rates);
  ctx.emit_json(
      {{"T_pK", T.T_3d * 1e12},
       {"T1d_pK", {T.T_1d[0] * 1e12, T.T_1d[1] * 1e12, T.T_1d[2] * 1e12}},
       {"rates_um_s", {rates[0] * 1e6, rates[1] * 1e6, rates[2] * 1e6}}},
      "scaling_summary.json");
  ctx.manifest("simulate-scaling");
  return 0;
}

int cmd_simulate_gpe(Ctx& ctx, const RampOpts& ropt,
                     const std::string& mode_name,
                     const std::string& grid_spec,
                     const std::string& extent_spec, double dt_us,
                     double hold_ms, int snapshots) {
  auto tables = make_tables(ctx);
  auto an = ropt.ansatz_for(tables);
  auto sched = design_ramp(an, tables, ropt.n_steps());

  PotentialModel model = mode_name == "harmonic" ? PotentialModel::HarmonicFixed
                         : mode_name == "anharmonic"
                             ? PotentialModel::AnharmonicFixed
                             : PotentialModel::AnharmonicRotating;
  TrapModel cls_model = mode_name == "harmonic" ? TrapModel::Harmonic
                                                : TrapModel::Anharmonic;

  GridSpec grid;
  {
    unsigned nx, ny, nz;
    if (std::sscanf(grid_spec.c_str(), "%u,%u,%u", &nx, &ny, &nz) != 3)
      throw UsageError("--grid must be NX,NY,NZ");
    grid.n = {nx, ny, nz};
  }
  Vec3 w0{sched.omega_x.front(), sched.omega_y.front(), sched.omega_z.front()};
  Vec3 wf{sched.omega_x.back(), sched.omega_y.back(), sched.omega_z.back()};
  Vec3 R0 = initial_tf_radii(ctx.cfg.species, w0);
  Vec3 Rf = initial_tf_radii(ctx.cfg.species, wf);
  if (extent_spec.empty()) {
    // Long axis: 6x the larger Thomas-Fermi radius; transverse: room for the
    // decompression breathing overshoot.
    grid.extent = {6.0 * std::max(R0[0], Rf[0]),
                   5.0 * std::max(R0[1], Rf[1]),
                   5.0 * std::max(R0[2], Rf[2])};
  } else {
    double ex, ey, ez;
    if (std::sscanf(extent_spec.c_str(), "%lf,%lf,%lf", &ex, &ey, &ez) != 3)
      throw UsageError("--extent-um must be X,Y,Z");
    grid.extent = {ex * 1e-6, ey * 1e-6, ez * 1e-6};
  }
  grid.validate();

  ctx.flags = ropt.to_json(an);
  ctx.flags["mode"] = mode_name;
  ctx.flags["grid"] = {grid.n[0], grid.n[1], grid.n[2]};
  ctx.flags["extent_m"] = {grid.extent[0], grid.extent[1], grid.extent[2]};
  ctx.flags["dt_s"] = dt_us * 1e-6;
  ctx.flags["hold_s"] = hold_ms * 1e-3;
  ctx.flags["snapshots"] = snapshots;

  auto cls = integrate(sched, cls_model, hold_ms * 1e-3);
  auto frame = frame_from_classical(cls.trajectory, ctx.cfg.species);

  GroundStateOptions gopt;
  gopt.workers = ctx.workers;
  auto gs = ground_state(grid, ctx.cfg.species, trap_snapshot(sched, 0.0),
                         model, gopt);
  std::fprintf(stderr, "ground state: mu/h = %.6g Hz, %ld iterations\n",
               gs.mu / constants::h_planck, gs.iterations);

  PropagationOptions popt;
  popt.dt = dt_us * 1e-6;
  popt.workers = ctx.workers;
  auto trapfun = [&sched](double t) { return trap_snapshot(sched, t); };

  const double t_end = an.t_f + hold_ms * 1e-3;
  GpeObservables all;
  WaveFunction psi = std::move(gs.psi);
  const int spans = snapshots > 0 ? snapshots : 1;
  for (int k = 0; k < spans; ++k) {
    double t0 = t_end * k / spans, t1 = t_end * (k + 1) / spans;
    auto res = propagate(std::move(psi), ctx.cfg.species, trapfun, model,
                         frame, t0, t1, popt);
    psi = std::move(res.psi);
    const auto& o = res.observables;
    size_t skip = (k > 0 && !o.times.empty()) ? 1 : 0; // span ends repeat
    for (size_t i = skip; i < o.times.size(); ++i) {
      all.times.push_back(o.times[i]);
      all.com_z.push_back(o.com_z[i]);
      all.cap_widths.push_back(o.cap_widths[i]);
      all.rot_widths.push_back(o.rot_widths[i]);
      all.norm.push_back(o.norm[i]);
      all.energy.push_back(o.energy[i]);
    }
    if (snapshots > 0) {
      char name[64];
      std::snprintf(name, sizeof name, "gpe_snapshot_%03d.bin", k);
      write_snapshot(ctx.path(name), lab_frame(psi, frame, t1), t1);
      ctx.outputs.push_back(name);
    }
  }

  CsvWriter csv({"t_s", "Za_m", "dX_m", "dY_m", "dZ_m", "dx_m", "dy_m",
                 "dz_m", "norm", "energy_J"});
  for (size_t i = 0; i < all.times.size(); ++i)
    csv.row({all.times[i], all.com_z[i], all.cap_widths[i][0],
             all.cap_widths[i][1], all.cap_widths[i][2], all.rot_widths[i][0],
             all.rot_widths[i][1], all.rot_widths[i][2], all.norm[i],
             all.energy[i]});
  ctx.emit_csv(csv, "gpe_observables.csv");
  ctx.emit_json({{"mu_J", gs.mu},
                 {"ground_state_iterations", gs.iterations},
                 {"final_norm", all.norm.empty() ? 0.0 : all.norm.back()}},
                "gpe_summary.json");
  ctx.manifest("simulate-gpe");
  return 0;
}

int cmd_analyze_modes(Ctx& ctx, const std::string& input,
                      const std::string& column, double prominence,
                      const std::string& nu_spec) {
  ctx.flags["input"] = input;
  ctx.flags["column"] = column;
  ctx.flags["prominence"] = prominence;

  std::ifstream in(input);
  if (!in) throw UsageError("cannot open input CSV " + input);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(input + ": empty CSV");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) header.push_back(tok);
  }
  size_t col = header.size();
  for (size_t i = 1; i < header.size(); ++i)
    if (header[i] == column) col = i;
  if (col == header.size())
    throw UsageError("column '" + column + "' not found in " + input);

  std::vector<double> times, values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != header.size())
      throw ParseError(input + ":" + std::to_string(lineno) +
                       ": row width mismatch");
    times.push_back(row[0]);
    values.push_back(row[col]);
  }

  auto spectrum = analyze_series(times, values, prominence);
  if (!nu_spec.empty()) {
    double nx, ny, nz;
    if (std::sscanf(nu_spec.c_str(), "%lf,%lf,%lf", &nx, &ny, &nz) != 3)
      throw UsageError("--nu-hz must be NUX,NUY,NUZ in Hz");
    ctx.flags["trap_nu_Hz"] = {nx, ny, nz};
    match_modes(spectrum, mode_frequencies(Vec3{nx, ny, nz} * (2.0 * M_PI)));
  }

  CsvWriter csv({"freq_Hz", "log_magnitude"});
  for (size_t i = 0; i < spectrum.frequencies.size(); ++i)
    csv.row({spectrum.frequencies[i], spectrum.log_magnitude[i]});
  ctx.emit_csv(csv, "modes_spectrum.csv");

  json peaks = json::array();
  for (const auto& p : spectrum.peaks)
    peaks.push_back({{"frequency_hz", p.frequency},
                     {"log_magnitude", p.log_magnitude},
                     {"mode", p.mode}});
  ctx.emit_json({{"peaks", peaks},
                 {"bin_width_hz", spectrum.bin_width},
                 {"parseval_residual", spectrum.parseval_residual}},
                "modes_peaks.json");
  ctx.manifest("analyze-modes");
  return 0;
}

SequencePlan dkc_plan(const RampSchedule& sched) {
  SequencePlan plan;
  plan.transport = &sched;
  plan.free2 = 1.0; // long enough for asymptotic expansion rates
  return plan;
}

int cmd_dkc_optimize(Ctx& ctx, const RampOpts& ropt,
                     const std::string& hold_range,
                     const std::string& lens_range,
                     const std::string& engine) {
  if (engine != "scaling")
    throw UsageError("dkc-optimize supports --engine scaling only");
  auto tables = make_tables(ctx);
  RampOpts r = ropt;
  if (r.zf_mm == 0.0) r.zf_mm = 1.35; // shallow-trap lensing position
  auto an = r.ansatz_for(tables);
  auto sched = design_ramp(an, tables, r.n_steps());

  auto holds = parse_range(hold_range, 1e-3);
  auto lenses = parse_range(lens_range, 1e-3);
  ctx.flags = r.to_json(an);
  ctx.flags["hold_values_s"] = holds;
  ctx.flags["lens_values_s"] = lenses;
  ctx.flags["engine"] = engine;

  auto plan = dkc_plan(sched);
  auto scan = optimize_hold_and_lens(plan, ctx.cfg.species, holds, lenses,
                                     ctx.workers);

  CsvWriter csv({"hold_ms", "lens_ms", "T_pK"});
  for (size_t i = 0; i < holds.size(); ++i)
    for (size_t j = 0; j < lenses.size(); ++j)
      csv.row({holds[i] * 1e3, lenses[j] * 1e3,
               scan.T_map[i * lenses.size() + j] * 1e12});
  ctx.emit_csv(csv, "dkc_tmap.csv");
  ctx.emit_json({{"hold_s", scan.best.hold},
                 {"lens_duration_s", scan.best.lens.duration},
                 {"free1_s", scan.best.free1},
                 {"free2_s", scan.best.free2},
                 {"T_pK", scan.best_T * 1e12}},
                "dkc_best.json");
  ctx.manifest("dkc-optimize");
  return 0;
}

// ------------------------------------------------------------- reproduce

struct Check {
  std::string label;
  double value;
  bool pass;
};

int finish_checks(Ctx& ctx, const std::string& fig,
                  const std::vector<Check>& checks) {
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%s: %.6g  %s\n", c.label.c_str(), c.value,
                c.pass ? "PASS" : "FAIL");
    all = all && c.pass;
  }
  json j = json::array();
  for (const auto& c : checks)
    j.push_back({{"label", c.label}, {"value", c.value}, {"pass", c.pass}});
  ctx.emit_json({{"figure", fig}, {"checks", j}}, fig + "_checks.json");
  ctx.manifest("reproduce");
  return all ? 0 : 1;
}

int reproduce_fig3(Ctx& ctx) {
  auto tables = make_tables(ctx);
  RampOpts r;
  auto an = r.ansatz_for(tables);
  auto sched = design_ramp(an, tables, r.n_steps());
  auto res = integrate(sched, TrapModel::Anharmonic, 100e-3);

  CsvWriter csv({"t_s", "z_m", "v_m_s", "z_t_m"});
  for (const auto& s : res.trajectory)
    csv.row({s.t, s.z, s.v, sample_series(sched.times, sched.z_t, s.t)});
  ctx.emit_csv(csv, "fig3_trajectory.csv");

  double resid = res.metrics.residual_amplitude;
  double offset = res.metrics.max_offset;
  return finish_checks(
      ctx, "fig3",
      {{"residual_amplitude_um", resid * 1e6,
        std::abs(resid - 0.7e-6) <= 0.3e-6},
       {"max_offset_um", offset * 1e6, std::abs(offset - 14e-6) <= 4e-6}});
}

int reproduce_fig4(Ctx& ctx) {
  auto tables = make_tables(ctx);
  std::vector<double> tf_values;
  for (double tf = 40e-3; tf <= 150.01e-3; tf += 5e-3) tf_values.push_back(tf);

  RampOpts chirped, nochirp, linear;
  nochirp.a = nochirp.b = 0.0;
  linear.ansatz = "linear";
  auto scan = [&](const RampOpts& r) {
    return ramp_time_scan(r.ansatz_for(tables), tables, tf_values,
                          TrapModel::Anharmonic, 100e-3, ctx.workers);
  };
  auto sc = scan(chirped), sn = scan(nochirp), sl = scan(linear);

  CsvWriter csv({"tf_s", "residual_chirped_m", "residual_nochirp_m",
                 "residual_linear_m"});
  double rc75 = 0, rn75 = 0, rl75 = 0;
  for (size_t i = 0; i < tf_values.size(); ++i) {
    csv.row({tf_values[i], sc[i].residual_amplitude, sn[i].residual_amplitude,
             sl[i].residual_amplitude});
    if (std::abs(tf_values[i] - 75e-3) < 1e-6) {
      rc75 = sc[i].residual_amplitude;
      rn75 = sn[i].residual_amplitude;
      rl75 = sl[i].residual_amplitude;
    }
  }
  ctx.emit_csv(csv, "fig4_scan.csv");
  return finish_checks(
      ctx, "fig4",
      {{"chirped_residual_um", rc75 * 1e6, std::abs(rc75 - 0.7e-6) <= 0.3e-6},
       {"nochirp_residual_um", rn75 * 1e6, std::abs(rn75 - 6e-6) <= 2e-6},
       {"linear_residual_um", rl75 * 1e6, rl75 >= 50e-6 && rl75 <= 200e-6}});
}

int reproduce_fig5(Ctx& ctx) {
  auto tables = make_tables(ctx);
  RampOpts r;
  auto an = r.ansatz_for(tables);
  auto sched = design_ramp(an, tables, r.n_steps());

  // Harmonic model isolates the bias-offset effect; the anharmonic model
  // would fold in the ~0.7 um unperturbed transport residual.
  CsvWriter csv({"delta_bias_mG", "residual_m"});
  double r1mG = 0;
  for (double mG : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    double resp = perturbation_response(sched, tables, TrapModel::Harmonic,
                                        mG * 1e-7, 0.0, 100e-3);
    csv.row({mG, resp});
    if (mG == 1.0) r1mG = resp;
  }
  ctx.emit_csv(csv, "fig5_bias_scan.csv");
  double rtf = perturbation_response(sched, tables, TrapModel::Anharmonic, 0.0,
                                     1e-3, 100e-3);
  return finish_checks(
      ctx, "fig5",
      {{"bias_1mG_residual_um", r1mG * 1e6,
        std::abs(r1mG - 0.5e-6) <= 0.25e-6},
       {"tf_1ms_residual_um", rtf * 1e6, rtf <= 2e-6}});
}

int reproduce_fig6(Ctx& ctx) {
  auto tables = make_tables(ctx);
  RampOpts r;
  auto an = r.ansatz_for(tables);
  auto sched = design_ramp(an, tables, r.n_steps());
  Vec3 w0{sched.omega_x.front(), sched.omega_y.front(), sched.omega_z.front()};
  Vec3 wf{sched.omega_x.back(), sched.omega_y.back(), sched.omega_z.back()};
  Vec3 R0 = initial_tf_radii(ctx.cfg.species, w0);

  TrapFrequencySchedule fs;
  fs.segments.push_back({an.t_f, 5e-6,
                         [&sched](double t) {
                           TrapSnapshot s = trap_snapshot(sched, t);
                           return Vec3{s.omega_x, s.omega_y, s.omega_z};
                         },
                         "transport"});
  fs.segments.push_back({100e-3, 5e-6, [wf](double) { return wf; }, "hold"});
  auto series = integrate_scaling(fs, w0, 5e-4);
  auto widths = width_series(series, R0);

  CsvWriter csv({"t_s", "dx_m", "dy_m", "dz_m"});
  for (size_t i = 0; i < series.times.size(); ++i)
    csv.row({series.times[i], widths[i][0], widths[i][1], widths[i][2]});
  ctx.emit_csv(csv, "fig6_scaling_widths.csv");

  // GPE cross-check on a reduced grid (the headline 5% RMS criterion runs on
  // the full 175 ms harmonic case).
  GridSpec grid;
  grid.n = {64, 256, 256};
  grid.extent = {160e-6, 64e-6, 70.4e-6};
  auto cls = integrate(sched, TrapModel::Harmonic, 100e-3);
  auto frame = frame_from_classical(cls.trajectory, ctx.cfg.species);
  GroundStateOptions gopt;
  gopt.workers = ctx.workers;
  auto gs = ground_state(grid, ctx.cfg.species, trap_snapshot(sched, 0.0),
                         PotentialModel::HarmonicFixed, gopt);
  PropagationOptions popt;
  popt.dt = 10e-6;
  popt.workers = ctx.workers;
  auto res = propagate(std::move(gs.psi), ctx.cfg.species,
                       [&sched](double t) { return trap_snapshot(sched, t); },
                       PotentialModel::HarmonicFixed, frame, 0.0,
                       an.t_f + 100e-3, popt);

  CsvWriter gcsv({"t_s", "dX_m", "dY_m", "dZ_m"});
  double sum2 = 0;
  size_t cnt = 0;
  for (size_t i = 0; i < res.observables.times.size(); ++i) {
    double t = res.observables.times[i];
    gcsv.row({t, res.observables.cap_widths[i][0],
              res.observables.cap_widths[i][1],
              res.observables.cap_widths[i][2]});
    for (int a = 0; a < 3; ++a) {
      std::vector<double> lam(series.lambda.size());
      for (size_t j = 0; j < lam.size(); ++j) lam[j] = series.lambda[j][a];
      double ws = R0[a] / std::sqrt(7.0) * sample_series(series.times, lam, t);
      sum2 += std::pow(res.observables.cap_widths[i][a] / ws - 1.0, 2);
      ++cnt;
    }
  }
  ctx.emit_csv(gcsv, "fig6_gpe_widths.csv");
  double rms = std::sqrt(sum2 / cnt);
  return finish_checks(ctx, "fig6",
                       {{"scaling_vs_gpe_rms_pct", rms * 100, rms < 0.05}});
}

int reproduce_fig7(Ctx& ctx) {
  auto tables = make_tables(ctx);
  std::vector<Check> checks;
  CsvWriter holdcsv({"t_s", "ramp_tf_s", "dx_m", "dy_m", "dz_m"});
  for (double tf : {75e-3, 750e-3}) {
    RampOpts r;
    r.tf_ms = tf * 1e3;
    auto an = r.ansatz_for(tables);
    auto sched = design_ramp(an, tables, r.n_steps());
    Vec3 w0{sched.omega_x.front(), sched.omega_y.front(),
            sched.omega_z.front()};
    Vec3 wf{sched.omega_x.back(), sched.omega_y.back(), sched.omega_z.back()};

    TrapFrequencySchedule fs;
    fs.segments.push_back({an.t_f, 5e-6,
                           [&sched](double t) {
                             TrapSnapshot s = trap_snapshot(sched, t);
                             return Vec3{s.omega_x, s.omega_y, s.omega_z};
                           },
                           "transport"});
    fs.segments.push_back({1.0, 5e-6, [wf](double) { return wf; }, "hold"});
    auto series = integrate_scaling(fs, w0, 2e-4);
    Vec3 R0 = initial_tf_radii(ctx.cfg.species, w0);
    auto widths = width_series(series, R0);

    std::vector<double> ht, hx;
    for (size_t i = 0; i < series.times.size(); ++i) {
      if (series.times[i] < an.t_f) continue;
      holdcsv.row({series.times[i], an.t_f, widths[i][0], widths[i][1],
                   widths[i][2]});
      ht.push_back(series.times[i]);
      hx.push_back(widths[i][0]);
    }
    // Excursion relative to the size at the end of transport.
    double excursion = 0;
    for (double w : hx)
      excursion = std::max(excursion, std::abs(w / hx.front() - 1.0));

    char label[64];
    if (tf < 0.5) {
      std::snprintf(label, sizeof label, "tf75_excursion_pct");
      checks.push_back({label, excursion * 100,
                        std::abs(excursion - 0.70) <= 0.20});
    } else {
      auto spectrum = analyze_series(ht, hx, 1e-3);
      auto modes = mode_frequencies(wf);
      match_modes(spectrum, modes);
      double peak = spectrum.peaks.empty() ? 0 : spectrum.peaks[0].frequency;
      double q1 = modes[Mode::Q1] / (2 * M_PI);
      checks.push_back({"tf750_peak_Hz_vs_Q1", peak,
                        std::abs(peak - q1) <= 0.05 * q1});
      checks.push_back({"tf750_excursion_pct", excursion * 100,
                        std::abs(excursion - 0.01) <= 0.005});
    }
  }
  ctx.emit_csv(holdcsv, "fig7_hold_widths.csv");
  return finish_checks(ctx, "fig7", checks);
}

int reproduce_fig8(Ctx& ctx) {
  auto tables = make_tables(ctx);
  RampOpts r;
  r.zf_mm = 1.35;
  auto an = r.ansatz_for(tables);
  auto sched = design_ramp(an, tables, r.n_steps());

  auto plan = dkc_plan(sched);
  plan.free2 = 2.0;
  auto rep = run_sequence(plan, ctx.cfg.species);

  CsvWriter csv({"t_s", "dx_m", "dy_m", "dz_m"});
  for (size_t i = 0; i < rep.times.size(); ++i)
    csv.row({rep.times[i], rep.widths[i][0], rep.widths[i][1],
             rep.widths[i][2]});
  ctx.emit_csv(csv, "fig8_sequence_widths.csv");

  SequencePlan cf = plan;
  cf.adiabatic_x = true;
  auto repc = run_sequence(cf, ctx.cfg.species);

  double T = rep.T_3d * 1e12;
  ctx.emit_json({{"T_pK", T},
                 {"T1d_pK", {rep.T_1d[0] * 1e12, rep.T_1d[1] * 1e12,
                             rep.T_1d[2] * 1e12}},
                 {"rates_um_s", {rep.rates[0] * 1e6, rep.rates[1] * 1e6,
                                 rep.rates[2] * 1e6}},
                 {"adiabatic_x_T_pK", repc.T_3d * 1e12}},
                "fig8_summary.json");
  return finish_checks(
      ctx, "fig8",
      {{"preset_T_pK", T, T >= 1.1 && T <= 4.4},
       {"ordering_Tx_gt_Tyz", rep.T_1d[0] * 1e12,
        rep.T_1d[0] > rep.T_1d[1] && rep.T_1d[0] > rep.T_1d[2] &&
            std::abs(rep.T_1d[1] - rep.T_1d[2]) <
                0.5 * (rep.T_1d[1] + rep.T_1d[2])},
       {"adiabatic_x_T_pK", repc.T_3d * 1e12, repc.T_3d > 100e-12}});
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atom-chip transport and delta-kick collimation toolkit"};
  app.require_subcommand(1);

  std::string config_flag, out_dir = ".";
  int workers = 1;
  app.add_option("--config", config_flag,
                 "Config file (default: $ATOMCHIP_STA_CONFIG or "
                 "configs/quantus_z.cfg)");
  app.add_option("--output-dir", out_dir, "Output directory");
  app.add_option("--workers", workers, "Worker threads (1 = bit reproducible)")
      ->check(CLI::PositiveNumber);

  auto* c_tables = app.add_subcommand("trap-tables",
                                      "Sweep the bias and tabulate the trap");

  auto* c_ramp = app.add_subcommand("design-ramp", "Reverse-engineer a ramp");
  RampOpts ramp_opts;
  ramp_opts.add_flags(c_ramp);

  auto* c_cls = app.add_subcommand("simulate-classical",
                                   "Classical point-particle transport");
  RampOpts cls_opts;
  cls_opts.add_flags(c_cls);
  std::string cls_model = "anharmonic", cls_scan;
  double cls_hold = 100.0, cls_dbias = 0.0, cls_dtf = 0.0;
  c_cls->add_option("--model", cls_model)
      ->check(CLI::IsMember({"harmonic", "anharmonic"}));
  c_cls->add_option("--hold-ms", cls_hold, "Post-transport hold [ms]");
  c_cls->add_option("--scan-tf", cls_scan, "Ramp-time scan lo:hi:step [ms]");
  c_cls->add_option("--delta-bias-mG", cls_dbias, "Bias offset [mG]");
  c_cls->add_option("--delta-tf-ms", cls_dtf, "Ramp duration error [ms]");

  auto* c_scl = app.add_subcommand("simulate-scaling",
                                   "Condensate widths via scaling equations");
  RampOpts scl_opts;
  scl_opts.add_flags(c_scl);
  double scl_hold = 100.0;
  c_scl->add_option("--hold-ms", scl_hold, "Post-transport hold [ms]");

  auto* c_gpe = app.add_subcommand("simulate-gpe",
                                   "3D mean-field transport simulation");
  RampOpts gpe_opts;
  gpe_opts.add_flags(c_gpe);
  std::string gpe_mode = "harmonic", gpe_grid = "64,64,64", gpe_extent;
  double gpe_dt = 2.5, gpe_hold = 100.0;
  int gpe_snaps = 0;
  c_gpe->add_option("--mode", gpe_mode)
      ->check(CLI::IsMember({"harmonic", "anharmonic", "rotating"}));
  c_gpe->add_option("--grid", gpe_grid, "Grid points NX,NY,NZ");
  c_gpe->add_option("--extent-um", gpe_extent,
                    "Grid extents X,Y,Z [um] (default: auto)");
  c_gpe->add_option("--dt-us", gpe_dt, "Time step [us]");
  c_gpe->add_option("--hold-ms", gpe_hold, "Post-transport hold [ms]");
  c_gpe->add_option("--snapshots", gpe_snaps,
                    "Number of wavefunction snapshots");

  auto* c_modes = app.add_subcommand("analyze-modes",
                                     "Spectral analysis of width series");
  std::string modes_input, modes_column = "dx_m", modes_nu;
  double modes_prom = 1e-3;
  c_modes->add_option("--input", modes_input, "Observables CSV")->required();
  c_modes->add_option("--column", modes_column, "Series column name");
  c_modes->add_option("--prominence", modes_prom, "Relative peak prominence");
  c_modes->add_option("--nu-hz", modes_nu,
                      "Trap frequencies NUX,NUY,NUZ [Hz] for mode labels");

  auto* c_dkc = app.add_subcommand("dkc-optimize",
                                   "Scan hold and lens durations");
  RampOpts dkc_opts;
  dkc_opts.add_flags(c_dkc);
  std::string dkc_hold = "27:36:1", dkc_lens = "3.5:6.5:0.5",
              dkc_engine = "scaling";
  c_dkc->add_option("--hold-range-ms", dkc_hold, "lo:hi:step [ms]");
  c_dkc->add_option("--lens-range-ms", dkc_lens, "lo:hi:step [ms]");
  c_dkc->add_option("--engine", dkc_engine)
      ->check(CLI::IsMember({"scaling", "gpe"}));

  auto* c_rep = app.add_subcommand("reproduce",
                                   "Regenerate the data behind one figure");
  std::string rep_fig;
  c_rep->add_option("figure", rep_fig, "fig3..fig8")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    Ctx ctx = make_ctx(config_flag, out_dir, workers);
    if (c_tables->parsed()) return cmd_trap_tables(ctx);
    if (c_ramp->parsed()) return cmd_design_ramp(ctx, ramp_opts);
    if (c_cls->parsed())
      return cmd_simulate_classical(ctx, cls_opts, cls_model, cls_hold,
                                    cls_scan, cls_dbias, cls_dtf);
    if (c_scl->parsed()) return cmd_simulate_scaling(ctx, scl_opts, scl_hold);
    if (c_gpe->parsed())
      return cmd_simulate_gpe(ctx, gpe_opts, gpe_mode, gpe_grid, gpe_extent,
                              gpe_dt, gpe_hold, gpe_snaps);
    if (c_modes->parsed())
      return cmd_analyze_modes(ctx, modes_input, modes_column, modes_prom,
                               modes_nu);
    if (c_dkc->parsed())
      return cmd_dkc_optimize(ctx, dkc_opts, dkc_hold, dkc_lens, dkc_engine);
    if (c_rep->parsed()) {
      ctx.flags["figure"] = rep_fig;
      if (rep_fig == "fig3") return reproduce_fig3(ctx);
      if (rep_fig == "fig4") return reproduce_fig4(ctx);
      if (rep_fig == "fig5") return reproduce_fig5(ctx);
      if (rep_fig == "fig6") return reproduce_fig6(ctx);
      if (rep_fig == "fig7") return reproduce_fig7(ctx);
      if (rep_fig == "fig8") return reproduce_fig8(ctx);
      throw UsageError("unknown figure '" + rep_fig +
                       "' (expected fig3..fig8)");
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
