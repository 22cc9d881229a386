#include "herdsim/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "herdsim/io.hpp"
#include "herdsim/parallel.hpp"

namespace herdsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::string name;
  bool pass;
  double value;
  double threshold;
  std::string note;
};

struct RunContext {
  fs::path out_dir;
  json manifest;
  std::vector<Check> checks;
  std::vector<std::string> artifact_names;

  void artifact(const std::string& name, const std::string& filename,
                const std::string& content) {
    write_file_atomic(out_dir / filename, content);
    manifest["artifacts"][name] = filename;
    artifact_names.push_back(filename);
  }

  void check(std::string name, bool pass, double value, double threshold,
             std::string note = "") {
    checks.push_back(
        {std::move(name), pass, value, threshold, std::move(note)});
  }
};

// Thm 2.2 sampling rate in d = 1 at moment order p
double sampling_rate(std::size_t N, double p) {
  return std::pow(double(N), -0.5) + std::pow(double(N), -(p - 1.0) / p);
}

std::string summary_text(const RunContext& rc, const std::string& experiment,
                         const std::string& hash, std::uint64_t seed) {
  std::string out = "herdsim run summary\n";
  out += "experiment: " + experiment + "\n";
  out += "config: " + hash + "\n";
  out += "seed: " + std::to_string(seed) + "\n";
  out += "artifacts:\n";
  for (const auto& a : rc.artifact_names) out += "  " + a + "\n";
  out += "checks:\n";
  bool all_pass = true;
  for (const auto& c : rc.checks) {
    all_pass = all_pass && c.pass;
    out += std::string("  ") + (c.pass ? "PASS " : "FAIL ") + c.name +
           " value=" + format_double(c.value) +
           " threshold=" + format_double(c.threshold);
    if (!c.note.empty()) out += " (" + c.note + ")";
    out += "\n";
  }
  out += std::string("result: ") + (all_pass ? "PASS" : "FAIL") + "\n";
  return out;
}

void run_simulate(const ExperimentConfig& cfg, RunContext& rc) {
  const auto state0 = draw_initial_state(*cfg.init, cfg.Y0, cfg.N, cfg.m,
                                         cfg.d, cfg.seed);
  const auto traj =
      simulate(state0, cfg.T, cfg.dt, *cfg.kernels, cfg.controls, cfg.seed,
               NoiseLevel(cfg.sigma), cfg.dt_max);
  rc.artifact("trajectory_csv", "trajectory.csv", trajectory_csv(traj));
  rc.artifact("trajectory_bin", "trajectory.bin", trajectory_binary(traj));
  rc.check("trajectory_nodes", traj.nodes() == step_count(cfg.T, cfg.dt) + 1,
           double(traj.nodes()), double(step_count(cfg.T, cfg.dt) + 1));
}

void run_mkv(const ExperimentConfig& cfg, RunContext& rc) {
  const auto sol =
      solve_mkv(*cfg.init, cfg.Y0, cfg.m, cfg.T, cfg.dt, *cfg.kernels,
                cfg.controls, cfg.M, cfg.seed, NoiseLevel(cfg.sigma),
                cfg.picard);
  const std::size_t stride =
      cfg.snapshot_stride ? cfg.snapshot_stride
                          : std::max<std::size_t>(1, sol.flow.nodes() / 10);
  rc.artifact("flow_csv", "flow.csv", flow_csv(sol.flow, stride));
  std::vector<double> times(sol.flow.nodes());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = sol.flow.time(k);
  rc.artifact("herders_csv", "herders.csv",
              herder_csv(times, sol.herders, cfg.m, cfg.d));
  rc.manifest["picard_iterations"] = sol.iterations;
  const double m4 = sup_moment(sol.flow, MomentOrder(4.0));
  rc.check("picard_converged", true, double(sol.iterations),
           double(cfg.picard.max_iter));
  rc.check("sup_M4_finite", std::isfinite(m4), m4,
           std::numeric_limits<double>::infinity());
}

void run_fp(const ExperimentConfig& cfg, RunContext& rc) {
  const auto rho0 = GridDensity::from_law(*cfg.init, cfg.grid);
  const auto sol = solve_fp(rho0, cfg.Y0, cfg.m, cfg.T, *cfg.kernels,
                            cfg.controls, NoiseLevel(cfg.sigma), cfg.fp);
  rc.artifact("density_csv", "density.csv", density_csv(sol));
  rc.artifact("herders_csv", "herders.csv",
              herder_csv(sol.times, sol.herders, cfg.m, 1));
  const double final_mass = sol.densities.back().mass();
  rc.check("mass_conserved", std::abs(final_mass - 1.0) <= 1e-8,
           std::abs(final_mass - 1.0), 1e-8);
  double min_rho = 0.0;
  for (const auto& g : sol.densities)
    for (double v : g.rho()) min_rho = std::min(min_rho, v);
  rc.check("density_nonnegative", min_rho >= -1e-12, min_rho, -1e-12);
  rc.manifest["fp_steps"] = sol.total_steps;
}

void run_chaos_rate(const ExperimentConfig& cfg, RunContext& rc) {
  const auto setup = cfg.setup();
  const auto res = chaos_rate_experiment(setup, cfg.N_grid, cfg.replicas,
                                         cfg.seed, cfg.mref_factor);
  std::string csv = "N,median_error,slope";
  for (std::size_t r = 0; r < cfg.replicas; ++r)
    csv += ",err_seed" + std::to_string(r);
  csv += "\n";
  for (std::size_t gi = 0; gi < res.N_grid.size(); ++gi) {
    csv += std::to_string(res.N_grid[gi]) + "," +
           format_double(res.medians[gi]) + "," + format_double(res.slope);
    for (double e : res.errors[gi]) csv += "," + format_double(e);
    csv += "\n";
  }
  rc.artifact("chaos_rate_csv", "chaos_rate.csv", csv);
  bool decreasing = true;
  for (std::size_t gi = 1; gi < res.medians.size(); ++gi)
    decreasing = decreasing && res.medians[gi] < res.medians[gi - 1];
  rc.check("median_error_decreasing", decreasing, decreasing ? 1.0 : 0.0, 1.0);
  rc.check("loglog_slope", res.slope <= cfg.chaos_slope_threshold, res.slope,
           cfg.chaos_slope_threshold);
}

void run_equivalence(const ExperimentConfig& cfg, RunContext& rc) {
  const auto setup = cfg.setup();
  const auto res =
      equivalence_experiment(setup, cfg.grid, cfg.M_equiv, cfg.seed, cfg.fp);
  std::string csv =
      "hypothesis_verifiable,entropy_rho0,second_moment_rho0,distance,"
      "fp_steps,picard_iterations\n";
  csv += std::string(res.hypothesis_verifiable ? "1" : "0") + "," +
         format_double(res.entropy_rho0) + "," +
         format_double(res.second_moment_rho0) + "," +
         format_double(res.distance) + "," + std::to_string(res.fp_steps) +
         "," + std::to_string(res.picard_iterations) + "\n";
  rc.artifact("equivalence_csv", "equivalence.csv", csv);
  if (!res.hypothesis_verifiable) {
    rc.check("hypothesis", true, 0.0, 0.0, res.hypothesis_note);
    return;
  }
  rc.check("hypothesis", true, 1.0, 1.0, res.hypothesis_note);
  rc.check("sde_pde_distance", res.distance <= cfg.equiv_threshold,
           res.distance, cfg.equiv_threshold);
}

void run_stability(const ExperimentConfig& cfg, RunContext& rc) {
  const auto setup = cfg.setup();
  const auto rows =
      stability_experiment(setup, cfg.j_grid, cfg.amplitude, cfg.seed);
  std::string csv = "j,deviation\n";
  for (const auto& row : rows)
    csv += std::to_string(row.j) + "," + format_double(row.deviation) + "\n";
  rc.artifact("stability_csv", "stability.csv", csv);
  bool decreasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    decreasing = decreasing && rows[i].deviation <= rows[i - 1].deviation;
  rc.check("deviation_decreasing", decreasing, decreasing ? 1.0 : 0.0, 1.0);
  if (rows.size() >= 2 && rows.front().deviation > 0.0)
    rc.check("deviation_halved",
             rows.back().deviation <= 0.5 * rows.front().deviation,
             rows.back().deviation / rows.front().deviation, 0.5);
}

void run_gamma_gap(const ExperimentConfig& cfg, RunContext& rc) {
  const auto setup = cfg.setup();
  const auto rows = gamma_gap_experiment(setup, cfg.N_grid, cfg.minimize_opts,
                                         cfg.optimize_g, cfg.seed);
  std::string csv = "N,minFN,minF,gap,stderr\n";
  for (const auto& row : rows)
    csv += std::to_string(row.N) + "," + format_double(row.min_FN) + "," +
           format_double(row.min_F) + "," + format_double(row.gap) + "," +
           format_double(row.std_error) + "\n";
  rc.artifact("gamma_gap_csv", "gamma_gap.csv", csv);
  if (rows.size() >= 2)
    rc.check("gap_shrinks", rows.back().gap <= rows.front().gap,
             rows.back().gap, rows.front().gap);
  const auto& last = rows.back();
  const double budget = 3.0 * (last.std_error + sampling_rate(last.N, 4.0));
  rc.check("gap_within_rate_budget", last.gap <= budget, last.gap, budget);
}

std::string controls_csv(const std::vector<ControlLaw>& laws) {
  std::string out = "herder,interval,g_tag,g_params,h_entries\n";
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const auto& law = laws[i];
    std::string gp;
    for (std::size_t k = 0; k < law.g.params().size(); ++k) {
      if (k) gp += ';';
      gp += format_double(law.g.params()[k]);
    }
    const std::size_t cell =
        static_cast<std::size_t>(law.h.dim()) * law.h.ell();
    for (std::size_t s = 0; s < law.h.intervals(); ++s) {
      out += std::to_string(i) + "," + std::to_string(s) + "," +
             law.g.kind_name() + "," + gp;
      for (std::size_t q = 0; q < cell; ++q) {
        out += ';';
        out += format_double(law.h.values()[s * cell + q]);
      }
      out += "\n";
    }
  }
  return out;
}

void run_optimize(const ExperimentConfig& cfg, RunContext& rc) {
  const auto setup = cfg.setup();
  ControlParameterization param(setup.controls, cfg.optimize_g);
  const auto lo = param.lower();
  const auto hi = param.upper();
  const std::uint64_t crn_seed = derive_seed(cfg.seed, 0xC12);

  std::function<double(std::span<const double>)> objective;
  if (cfg.objective == "F") {
    objective = [&](std::span<const double> p) {
      return eval_F(setup.init, setup.Y0, setup.m, setup.T, setup.dt,
                    setup.kernels, param.build(p), setup.cost, setup.M_limit,
                    crn_seed, setup.noise, setup.picard);
    };
  } else {
    objective = [&](std::span<const double> p) {
      return eval_FN(setup.init, setup.Y0, setup.m, cfg.N, setup.T, setup.dt,
                     setup.kernels, param.build(p), setup.cost,
                     setup.replicas, crn_seed, setup.noise)
          .value;
    };
  }
  auto opts = cfg.minimize_opts;
  opts.seed = cfg.seed;
  const auto report = minimize(objective, lo, hi, param.initial(), opts);

  std::string trace = "evaluation,best_value\n";
  for (std::size_t k = 0; k < report.trace.size(); ++k)
    trace += std::to_string(k + 1) + "," + format_double(report.trace[k]) +
             "\n";
  rc.artifact("trace_csv", "trace.csv", trace);
  rc.artifact("best_controls_csv", "best_controls.csv",
              controls_csv(param.build(report.best_params)));
  rc.manifest["best_value"] = report.best_value;
  rc.manifest["evaluations"] = report.evaluations;
  rc.manifest["restarts"] = report.restarts;

  bool in_box = true;
  for (std::size_t k = 0; k < report.best_params.size(); ++k)
    in_box = in_box && report.best_params[k] >= lo[k] &&
             report.best_params[k] <= hi[k];
  rc.check("best_params_in_box", in_box, in_box ? 1.0 : 0.0, 1.0);
  rc.check("budget_respected", report.evaluations <= opts.budget,
           double(report.evaluations), double(opts.budget));
}

}  // namespace

int run_experiment(const json& raw_config, const fs::path& out_dir,
                   std::ostream& log, bool verbose) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(raw_config);
  } catch (const ConfigError& e) {
    log << e.what() << "\n";
    return 1;
  }
  if (cfg.threads) set_thread_count(cfg.threads);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    log << "cannot create output directory " << out_dir << "\n";
    return 1;
  }

  RunContext rc;
  rc.out_dir = out_dir;
  const std::string hash = config_hash(raw_config);
  rc.manifest["config_hash"] = hash;
  rc.manifest["version"] = kToolkitVersion;
  rc.manifest["experiment"] = cfg.experiment;
  rc.manifest["seed"] = cfg.seed;
  {
    json ledger = json::array();
    for (std::size_t r = 0; r < cfg.replicas; ++r)
      ledger.push_back(derive_seed(cfg.seed, r));
    rc.manifest["seed_ledger"] = ledger;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (cfg.experiment == "simulate") run_simulate(cfg, rc);
    else if (cfg.experiment == "mkv") run_mkv(cfg, rc);
    else if (cfg.experiment == "fp") run_fp(cfg, rc);
    else if (cfg.experiment == "chaos_rate") run_chaos_rate(cfg, rc);
    else if (cfg.experiment == "equivalence") run_equivalence(cfg, rc);
    else if (cfg.experiment == "stability") run_stability(cfg, rc);
    else if (cfg.experiment == "gamma_gap") run_gamma_gap(cfg, rc);
    else if (cfg.experiment == "optimize") run_optimize(cfg, rc);
  } catch (const std::exception& e) {
    log << "experiment failed: " << e.what() << "\n";
    return 2;
  }
  const auto t1 = std::chrono::steady_clock::now();
  rc.manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(t1 - t0).count();

  json checks = json::array();
  bool all_pass = true;
  for (const auto& c : rc.checks) {
    json jc{{"name", c.name},
            {"pass", c.pass},
            {"value", c.value},
            {"threshold", c.threshold}};
    if (!c.note.empty()) jc["note"] = c.note;
    checks.push_back(jc);
    all_pass = all_pass && c.pass;
  }
  rc.manifest["checks"] = checks;

  const std::string summary = summary_text(rc, cfg.experiment, hash, cfg.seed);
  rc.manifest["artifacts"]["summary"] = "summary.txt";
  rc.artifact_names.push_back("summary.txt");
  write_file_atomic(out_dir / "summary.txt", summary);
  write_file_atomic(out_dir / "manifest.json", rc.manifest.dump(2) + "\n");
  if (verbose) log << summary;
  log << (all_pass ? "OK " : "CHECKS FAILED ") << out_dir.string() << "\n";
  return all_pass ? 0 : 3;
}

int report_manifest(const fs::path& manifest_path, std::ostream& out) {
  std::ifstream is(manifest_path);
  if (!is) {
    out << "manifest not found: " << manifest_path.string() << "\n";
    return 1;
  }
  json manifest;
  try {
    is >> manifest;
  } catch (const std::exception& e) {
    out << "manifest is not valid JSON: " << e.what() << "\n";
    return 1;
  }
  const fs::path dir = manifest_path.parent_path();
  out << "herdsim report\n";
  out << "experiment: " << manifest.value("experiment", std::string("?"))
      << "\n";
  out << "config: " << manifest.value("config_hash", std::string("?")) << "\n";
  bool partial = false;
  out << "artifacts:\n";
  if (manifest.contains("artifacts"))
    for (const auto& [name, file] : manifest["artifacts"].items()) {
      const fs::path p = dir / file.get<std::string>();
      if (fs::exists(p)) {
        out << "  " << file.get<std::string>() << "\n";
      } else {
        out << "  MISSING " << file.get<std::string>() << "\n";
        partial = true;
      }
    }
  bool all_pass = true;
  out << "checks:\n";
  if (manifest.contains("checks"))
    for (const auto& c : manifest["checks"]) {
      const bool pass = c.value("pass", false);
      all_pass = all_pass && pass;
      out << "  " << (pass ? "PASS " : "FAIL ")
          << c.value("name", std::string("?"))
          << " value=" << format_double(c.value("value", 0.0))
          << " threshold=" << format_double(c.value("threshold", 0.0));
      if (c.contains("note")) out << " (" << c["note"].get<std::string>() << ")";
      out << "\n";
    }
  if (partial) {
    out << "result: PARTIAL (artifacts missing)\n";
    return 1;
  }
  out << "result: " << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? 0 : 3;
}

int convert_trajectory(const fs::path& in, const fs::path& out,
                       std::ostream& log) {
  std::ifstream is(in, std::ios::binary);
  if (!is) {
    log << "cannot read " << in.string() << "\n";
    return 1;
  }
  try {
    const auto traj = parse_trajectory_binary(is);
    write_file_atomic(out, trajectory_csv(traj));
  } catch (const std::exception& e) {
    log << "convert failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace herdsim
