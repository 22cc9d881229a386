#include "herdsim/config.hpp"

#include <fstream>
#include <set>

#include "herdsim/io.hpp"

namespace herdsim {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

struct Ctx {
  std::vector<std::string> errors;

  void err(const std::string& path, const std::string& msg) {
    errors.push_back(path + ": " + msg);
  }

  void check_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
      if (!allowed.count(key)) err(path + "." + key, "unknown key");
  }

  bool has(const json& obj, const char* key) const {
    return obj.contains(key);
  }

  double num(const json& obj, const std::string& path, const char* key,
             double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
      err(path + "." + key, "expected a number");
      return fallback;
    }
    return obj[key].get<double>();
  }

  std::int64_t integer(const json& obj, const std::string& path,
                       const char* key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
      err(path + "." + key, "expected an integer");
      return fallback;
    }
    return obj[key].get<std::int64_t>();
  }

  std::string str(const json& obj, const std::string& path, const char* key,
                  const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) {
      err(path + "." + key, "expected a string");
      return fallback;
    }
    return obj[key].get<std::string>();
  }

  bool boolean(const json& obj, const std::string& path, const char* key,
               bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) {
      err(path + "." + key, "expected a boolean");
      return fallback;
    }
    return obj[key].get<bool>();
  }

  std::vector<double> num_array(const json& obj, const std::string& path,
                                const char* key) {
    std::vector<double> out;
    if (!obj.contains(key)) return out;
    if (!obj[key].is_array()) {
      err(path + "." + key, "expected an array of numbers");
      return out;
    }
    for (const auto& v : obj[key]) {
      if (!v.is_number()) {
        err(path + "." + key, "expected an array of numbers");
        return {};
      }
      out.push_back(v.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> size_array(const json& obj, const std::string& path,
                                      const char* key) {
    std::vector<std::size_t> out;
    if (!obj.contains(key)) return out;
    if (!obj[key].is_array()) {
      err(path + "." + key, "expected an array of positive integers");
      return out;
    }
    for (const auto& v : obj[key]) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        err(path + "." + key, "expected an array of positive integers");
        return {};
      }
      out.push_back(v.get<std::size_t>());
    }
    return out;
  }
};

std::optional<KernelSpec> parse_kernel(Ctx& ctx, const json& obj,
                                       const std::string& path, int d) {
  if (!obj.is_object()) {
    ctx.err(path, "expected an object {family, a[, s]}");
    return std::nullopt;
  }
  ctx.check_keys(obj, path, {"family", "a", "s"});
  const std::string family = ctx.str(obj, path, "family", "");
  const double a = ctx.num(obj, path, "a", 0.0);
  const double s = ctx.num(obj, path, "s", 1.0);
  if (family == "linear") return KernelSpec::linear(a, d);
  if (family == "saturating") return KernelSpec::saturating(a, d);
  if (family == "tanh_radial") {
    if (!(s > 0.0)) {
      ctx.err(path + ".s", "tanh_radial needs s > 0");
      return std::nullopt;
    }
    return KernelSpec::tanh_radial(a, s, d);
  }
  ctx.err(path + ".family",
          "unknown kernel family '" + family +
              "' (linear | saturating | tanh_radial)");
  return std::nullopt;
}

std::optional<GFunctional> parse_g(Ctx& ctx, const json& obj,
                                   const std::string& path, int d,
                                   std::size_t ell) {
  if (!obj.is_object()) {
    ctx.err(path, "expected an object {kind, params}");
    return std::nullopt;
  }
  ctx.check_keys(obj, path, {"kind", "params"});
  const std::string kind = ctx.str(obj, path, "kind", "constant");
  auto params = ctx.num_array(obj, path, "params");
  if (params.empty()) params.assign(ell, 0.0);
  if (params.size() != ell) {
    ctx.err(path + ".params", "expected " + std::to_string(ell) + " entries");
    return std::nullopt;
  }
  try {
    if (kind == "constant") return GFunctional::constant(std::move(params), d);
    if (kind == "tanh_statistic")
      return GFunctional::tanh_statistic(std::move(params), d);
  } catch (const std::exception& e) {
    ctx.err(path, e.what());
    return std::nullopt;
  }
  ctx.err(path + ".kind",
          "unknown g kind '" + kind + "' (constant | tanh_statistic)");
  return std::nullopt;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid config:\n  " + join(errors, "\n  ")),
      errors_(std::move(errors)) {}

ExperimentConfig parse_config(const json& j) {
  Ctx ctx;
  ExperimentConfig cfg;
  if (!j.is_object()) {
    ctx.errors.push_back("config: expected a JSON object");
    throw ConfigError(std::move(ctx.errors));
  }
  ctx.check_keys(j, "config",
                 {"schema_version", "experiment", "seed", "replicas",
                  "output_dir", "threads", "dynamics", "control", "cost",
                  "mkv", "fp", "optimizer", "experiment_params"});

  cfg.schema_version = int(ctx.integer(j, "config", "schema_version", 1));
  if (cfg.schema_version != 1)
    ctx.err("config.schema_version", "this toolkit reads schema version 1");

  static const std::set<std::string> kExperiments = {
      "simulate", "mkv",       "fp",        "chaos_rate",
      "equivalence", "stability", "gamma_gap", "optimize"};
  cfg.experiment = ctx.str(j, "config", "experiment", "");
  if (!kExperiments.count(cfg.experiment))
    ctx.err("config.experiment",
            "unknown experiment '" + cfg.experiment +
                "' (simulate | mkv | fp | chaos_rate | equivalence | "
                "stability | gamma_gap | optimize)");

  {
    const auto s = ctx.integer(j, "config", "seed", 0);
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  const auto reps = ctx.integer(j, "config", "replicas", 2);
  if (reps < 1)
    ctx.err("config.replicas", "must be >= 1");
  else
    cfg.replicas = std::size_t(reps);
  cfg.output_dir = ctx.str(j, "config", "output_dir", "");
  const auto thr = ctx.integer(j, "config", "threads", 0);
  if (thr < 0)
    ctx.err("config.threads", "must be >= 0");
  else
    cfg.threads = std::size_t(thr);

  // ---- dynamics ----
  const json dyn = j.value("dynamics", json::object());
  const std::string dp = "config.dynamics";
  if (!dyn.is_object()) {
    ctx.err(dp, "expected an object");
    throw ConfigError(std::move(ctx.errors));
  }
  ctx.check_keys(dyn, dp,
                 {"d", "N", "m", "T", "dt", "dt_max", "sigma", "kernels",
                  "init", "Y0"});
  const auto d64 = ctx.integer(dyn, dp, "d", 1);
  if (d64 < 1)
    ctx.err(dp + ".d", "must be >= 1");
  else
    cfg.d = int(d64);
  const auto N64 = ctx.integer(dyn, dp, "N", 64);
  if (N64 < 1)
    ctx.err(dp + ".N", "must be >= 1");
  else
    cfg.N = std::size_t(N64);
  const auto m64 = ctx.integer(dyn, dp, "m", 1);
  if (m64 < 1)
    ctx.err(dp + ".m", "must be >= 1");
  else
    cfg.m = std::size_t(m64);
  cfg.T = ctx.num(dyn, dp, "T", 1.0);
  if (!(cfg.T >= 0.0)) ctx.err(dp + ".T", "must be >= 0");
  cfg.dt = ctx.num(dyn, dp, "dt", 1e-3);
  if (!(cfg.dt > 0.0)) ctx.err(dp + ".dt", "must be > 0");
  cfg.dt_max = ctx.num(dyn, dp, "dt_max", 0.0);
  if (cfg.dt_max < 0.0) ctx.err(dp + ".dt_max", "must be >= 0");
  cfg.sigma = ctx.num(dyn, dp, "sigma", 0.25);
  if (!(cfg.sigma >= 0.0)) ctx.err(dp + ".sigma", "sigma must be >= 0");
  if (cfg.T > 0.0 && cfg.dt > 0.0) {
    const double raw = cfg.T / cfg.dt;
    if (std::abs(raw - std::llround(raw)) > 1e-9 * std::max(1.0, raw))
      ctx.err(dp + ".dt", "T/dt must be an integer number of steps");
  }

  // kernels (default: all zero)
  {
    const json ks = dyn.value("kernels", json::object());
    const std::string kp = dp + ".kernels";
    if (!ks.is_object()) {
      ctx.err(kp, "expected an object");
    } else {
      ctx.check_keys(ks, kp, {"H1", "H2", "K1", "K2"});
      auto one = [&](const char* name) -> std::optional<KernelSpec> {
        if (!ks.contains(name)) return KernelSpec::linear(0.0, cfg.d);
        return parse_kernel(ctx, ks[name], kp + "." + name, cfg.d);
      };
      auto h1 = one("H1"), h2 = one("H2"), k1 = one("K1"), k2 = one("K2");
      if (h1 && h2 && k1 && k2)
        cfg.kernels.emplace(*h1, *h2, *k1, *k2);
    }
  }

  // initial law (default: standard gaussian)
  {
    const json in = dyn.value("init", json::object());
    const std::string ip = dp + ".init";
    if (!in.is_object()) {
      ctx.err(ip, "expected an object");
    } else {
      ctx.check_keys(in, ip, {"law", "mean", "std", "lo", "hi", "atoms_csv"});
      const std::string law = ctx.str(in, ip, "law", "gaussian");
      if (law == "gaussian") {
        auto mean = ctx.num_array(in, ip, "mean");
        if (mean.empty()) mean.assign(std::size_t(cfg.d), 0.0);
        const double sd = ctx.num(in, ip, "std", 1.0);
        if (mean.size() != std::size_t(cfg.d))
          ctx.err(ip + ".mean", "expected d entries");
        else if (!(sd >= 0.0))
          ctx.err(ip + ".std", "must be >= 0");
        else
          cfg.init = InitialLaw::gaussian(std::move(mean), sd);
      } else if (law == "uniform") {
        auto lo = ctx.num_array(in, ip, "lo");
        auto hi = ctx.num_array(in, ip, "hi");
        if (lo.size() != std::size_t(cfg.d) || hi.size() != std::size_t(cfg.d)) {
          ctx.err(ip, "uniform law needs lo and hi arrays of length d");
        } else {
          bool ok = true;
          for (std::size_t k = 0; k < lo.size(); ++k)
            if (!(lo[k] < hi[k])) ok = false;
          if (!ok)
            ctx.err(ip, "uniform law needs lo < hi componentwise");
          else
            cfg.init = InitialLaw::uniform_box(std::move(lo), std::move(hi));
        }
      } else if (law == "empirical") {
        const std::string file = ctx.str(in, ip, "atoms_csv", "");
        if (file.empty()) {
          ctx.err(ip + ".atoms_csv", "empirical law needs an atoms CSV path");
        } else {
          std::ifstream is(file);
          if (!is) {
            ctx.err(ip + ".atoms_csv", "cannot read '" + file + "'");
          } else {
            try {
              auto atoms = EmpiricalMeasure::read_csv(is);
              if (atoms.dim() != std::size_t(cfg.d))
                ctx.err(ip + ".atoms_csv", "atoms dimension != d");
              else
                cfg.init = InitialLaw::empirical(std::move(atoms));
            } catch (const std::exception& e) {
              ctx.err(ip + ".atoms_csv", e.what());
            }
          }
        }
      } else {
        ctx.err(ip + ".law",
                "unknown law '" + law + "' (gaussian | uniform | empirical)");
      }
    }
  }

  // herder starting positions (default: origin)
  {
    cfg.Y0.assign(cfg.m * std::size_t(cfg.d), 0.0);
    if (dyn.contains("Y0")) {
      const json& y = dyn["Y0"];
      if (!y.is_array() || y.size() != cfg.m) {
        ctx.err(dp + ".Y0", "expected an array of m points");
      } else {
        bool ok = true;
        std::vector<double> flat;
        for (const auto& row : y) {
          if (!row.is_array() || row.size() != std::size_t(cfg.d)) {
            ok = false;
            break;
          }
          for (const auto& v : row) {
            if (!v.is_number()) {
              ok = false;
              break;
            }
            flat.push_back(v.get<double>());
          }
        }
        if (!ok)
          ctx.err(dp + ".Y0", "expected m rows of d numbers");
        else
          cfg.Y0 = std::move(flat);
      }
    }
  }

  // ---- control ----
  std::size_t ell = 2, intervals = 8;
  double u_max = 2.0;
  {
    const json cj = j.value("control", json::object());
    const std::string cp = "config.control";
    if (!cj.is_object()) {
      ctx.err(cp, "expected an object");
    } else {
      ctx.check_keys(cj, cp, {"ell", "intervals", "u_max", "laws"});
      const auto e64 = ctx.integer(cj, cp, "ell", 2);
      if (e64 < 1)
        ctx.err(cp + ".ell", "must be >= 1");
      else
        ell = std::size_t(e64);
      const auto i64 = ctx.integer(cj, cp, "intervals", 8);
      if (i64 < 1)
        ctx.err(cp + ".intervals", "must be >= 1");
      else
        intervals = std::size_t(i64);
      u_max = ctx.num(cj, cp, "u_max", 2.0);
      if (!(u_max >= 0.0)) ctx.err(cp + ".u_max", "must be >= 0");

      const double t_end = cfg.T > 0.0 ? cfg.T : 1.0;
      if (cj.contains("laws")) {
        const json& laws = cj["laws"];
        if (!laws.is_array() || laws.size() != cfg.m) {
          ctx.err(cp + ".laws", "expected an array of m control laws");
        } else {
          for (std::size_t i = 0; i < laws.size(); ++i) {
            const std::string lp = cp + ".laws[" + std::to_string(i) + "]";
            const json& law = laws[i];
            if (!law.is_object()) {
              ctx.err(lp, "expected an object {h, g}");
              continue;
            }
            ctx.check_keys(law, lp, {"h", "g"});
            std::optional<PiecewisePath> h;
            if (!law.contains("h") ||
                (law["h"].is_string() && law["h"] == "zero")) {
              h = PiecewisePath::zero(intervals, cfg.d, ell, t_end, u_max);
            } else if (law["h"].is_array()) {
              std::vector<double> values;
              bool ok = true;
              for (const auto& block : law["h"]) {
                if (!block.is_array()) {
                  ok = false;
                  break;
                }
                for (const auto& v : block) {
                  if (!v.is_number()) {
                    ok = false;
                    break;
                  }
                  values.push_back(v.get<double>());
                }
              }
              if (!ok || law["h"].size() != intervals ||
                  values.size() != intervals * std::size_t(cfg.d) * ell) {
                ctx.err(lp + ".h", "expected intervals blocks of d*ell numbers");
              } else {
                try {
                  h = PiecewisePath(std::move(values), intervals, cfg.d, ell,
                                    t_end, u_max);
                } catch (const std::exception& e) {
                  ctx.err(lp + ".h", e.what());
                }
              }
            } else {
              ctx.err(lp + ".h", "expected \"zero\" or interval blocks");
            }
            auto g = law.contains("g")
                         ? parse_g(ctx, law["g"], lp + ".g", cfg.d, ell)
                         : GFunctional::constant(
                               std::vector<double>(ell, 0.0), cfg.d);
            if (h && g) cfg.controls.emplace_back(std::move(*h), std::move(*g));
          }
        }
      }
      if (cfg.controls.empty() && ctx.errors.empty()) {
        for (std::size_t i = 0; i < cfg.m; ++i)
          cfg.controls.push_back(
              ControlLaw::zero(cfg.d, ell, intervals, t_end, u_max));
      }
    }
  }

  // ---- cost ----
  {
    const json cj = j.value("cost", json::object());
    const std::string cp = "config.cost";
    if (!cj.is_object()) {
      ctx.err(cp, "expected an object");
    } else {
      ctx.check_keys(cj, cp, {"lagrangian", "psi"});
      const json lj = cj.value("lagrangian", json::object());
      const std::string lp = cp + ".lagrangian";
      ctx.check_keys(lj, lp,
                     {"kind", "x_star", "y_star", "clamp_radius", "beta",
                      "value"});
      const std::string kind = ctx.str(lj, lp, "kind", "clamped_tracking");
      if (kind == "zero") {
        cfg.cost.lagrangian.zero = true;
      } else if (kind == "constant") {
        cfg.cost.lagrangian.zero = true;
        cfg.cost.lagrangian.constant = ctx.num(lj, lp, "value", 1.0);
      } else if (kind == "clamped_tracking") {
        auto xs = ctx.num_array(lj, lp, "x_star");
        if (xs.empty()) xs.assign(std::size_t(cfg.d), 0.0);
        if (xs.size() != std::size_t(cfg.d))
          ctx.err(lp + ".x_star", "expected d entries");
        std::vector<double> ys;
        if (lj.contains("y_star")) {
          const json& yj = lj["y_star"];
          bool ok = yj.is_array() && yj.size() == cfg.m;
          if (ok)
            for (const auto& row : yj) {
              if (!row.is_array() || row.size() != std::size_t(cfg.d)) {
                ok = false;
                break;
              }
              for (const auto& v : row) ys.push_back(v.get<double>());
            }
          if (!ok) ctx.err(lp + ".y_star", "expected m rows of d numbers");
        } else {
          ys.assign(cfg.m * std::size_t(cfg.d), 0.0);
        }
        const double R = ctx.num(lj, lp, "clamp_radius", 4.0);
        if (!(R > 0.0)) ctx.err(lp + ".clamp_radius", "must be > 0");
        const double beta = ctx.num(lj, lp, "beta", 1.0);
        if (!(beta >= 0.0)) ctx.err(lp + ".beta", "must be >= 0");
        cfg.cost.lagrangian.x_star = std::move(xs);
        cfg.cost.lagrangian.y_star = std::move(ys);
        cfg.cost.lagrangian.clamp_radius = R;
        cfg.cost.lagrangian.beta = beta;
      } else {
        ctx.err(lp + ".kind",
                "unknown kind '" + kind +
                    "' (clamped_tracking | zero | constant)");
      }
      const json pj = cj.value("psi", json::object());
      const std::string pp = cp + ".psi";
      ctx.check_keys(pj, pp, {"lambda", "kappa", "h_norm"});
      cfg.cost.psi.lambda = ctx.num(pj, pp, "lambda", 0.0);
      if (cfg.cost.psi.lambda < 0.0) ctx.err(pp + ".lambda", "must be >= 0");
      cfg.cost.psi.kappa = ctx.num(pj, pp, "kappa", 0.0);
      if (cfg.cost.psi.kappa < 0.0) ctx.err(pp + ".kappa", "must be >= 0");
      const std::string hn = ctx.str(pj, pp, "h_norm", "l1");
      if (hn == "l1")
        cfg.cost.psi.h_norm = ControlPenalty::HNorm::l1;
      else if (hn == "frobenius2")
        cfg.cost.psi.h_norm = ControlPenalty::HNorm::frobenius_sq;
      else
        ctx.err(pp + ".h_norm", "unknown norm '" + hn + "' (l1 | frobenius2)");
    }
  }

  // ---- mkv ----
  {
    const json mj = j.value("mkv", json::object());
    const std::string mp = "config.mkv";
    ctx.check_keys(mj, mp, {"M", "picard"});
    const auto M64 = ctx.integer(mj, mp, "M", 2000);
    if (M64 < 2)
      ctx.err(mp + ".M", "must be >= 2");
    else
      cfg.M = std::size_t(M64);
    const json pj = mj.value("picard", json::object());
    const std::string pp = mp + ".picard";
    ctx.check_keys(pj, pp, {"gamma", "tol", "max_iter"});
    cfg.picard.gamma = ctx.num(pj, pp, "gamma", -1.0);
    cfg.picard.tol = ctx.num(pj, pp, "tol", 1e-3);
    if (!(cfg.picard.tol > 0.0)) ctx.err(pp + ".tol", "must be > 0");
    const auto it64 = ctx.integer(pj, pp, "max_iter", 50);
    if (it64 < 1)
      ctx.err(pp + ".max_iter", "must be >= 1");
    else
      cfg.picard.max_iter = int(it64);
  }

  // ---- fp ----
  {
    const json fj = j.value("fp", json::object());
    const std::string fp = "config.fp";
    ctx.check_keys(fj, fp,
                   {"x_min", "x_max", "n_cells", "cfl_safety", "n_snapshots",
                    "v_max"});
    cfg.grid.x_min = ctx.num(fj, fp, "x_min", -8.0);
    cfg.grid.x_max = ctx.num(fj, fp, "x_max", 8.0);
    if (!(cfg.grid.x_min < cfg.grid.x_max))
      ctx.err(fp, "x_min must be < x_max");
    const auto nc = ctx.integer(fj, fp, "n_cells", 512);
    if (nc < 2)
      ctx.err(fp + ".n_cells", "must be >= 2");
    else
      cfg.grid.n_cells = std::size_t(nc);
    cfg.fp.cfl_safety = ctx.num(fj, fp, "cfl_safety", 0.45);
    if (!(cfg.fp.cfl_safety > 0.0 && cfg.fp.cfl_safety <= 1.0))
      ctx.err(fp + ".cfl_safety", "must be in (0, 1]");
    const auto ns = ctx.integer(fj, fp, "n_snapshots", 101);
    if (ns < 2)
      ctx.err(fp + ".n_snapshots", "must be >= 2");
    else
      cfg.fp.n_snapshots = std::size_t(ns);
    cfg.fp.v_max = ctx.num(fj, fp, "v_max", 1e3);
    if (!(cfg.fp.v_max > 0.0)) ctx.err(fp + ".v_max", "must be > 0");
  }

  // ---- optimizer ----
  {
    const json oj = j.value("optimizer", json::object());
    const std::string op = "config.optimizer";
    ctx.check_keys(oj, op,
                   {"budget", "method", "initial_step", "optimize_g",
                    "objective"});
    const auto b64 = ctx.integer(oj, op, "budget", 500);
    if (b64 < 3)
      ctx.err(op + ".budget", "must be >= 3");
    else
      cfg.minimize_opts.budget = std::size_t(b64);
    const std::string method = ctx.str(oj, op, "method", "nelder_mead");
    if (method == "nelder_mead")
      cfg.minimize_opts.method = SearchMethod::nelder_mead;
    else if (method == "pattern")
      cfg.minimize_opts.method = SearchMethod::pattern;
    else
      ctx.err(op + ".method",
              "unknown method '" + method + "' (nelder_mead | pattern)");
    cfg.minimize_opts.initial_step = ctx.num(oj, op, "initial_step", 0.25);
    if (!(cfg.minimize_opts.initial_step > 0.0))
      ctx.err(op + ".initial_step", "must be > 0");
    cfg.optimize_g = ctx.boolean(oj, op, "optimize_g", true);
    cfg.objective = ctx.str(oj, op, "objective", "FN");
    if (cfg.objective != "FN" && cfg.objective != "F")
      ctx.err(op + ".objective", "must be FN or F");
  }

  // ---- experiment params ----
  {
    const json ej = j.value("experiment_params", json::object());
    const std::string ep = "config.experiment_params";
    ctx.check_keys(ej, ep,
                   {"N_grid", "j_grid", "amplitude", "mref_factor", "M_equiv",
                    "equiv_threshold", "chaos_slope_threshold",
                    "snapshot_stride"});
    cfg.N_grid = ctx.size_array(ej, ep, "N_grid");
    for (std::size_t i = 1; i < cfg.N_grid.size(); ++i)
      if (cfg.N_grid[i] <= cfg.N_grid[i - 1]) {
        ctx.err(ep + ".N_grid", "must be strictly increasing");
        break;
      }
    cfg.j_grid = ctx.size_array(ej, ep, "j_grid");
    for (std::size_t i = 1; i < cfg.j_grid.size(); ++i)
      if (cfg.j_grid[i] <= cfg.j_grid[i - 1]) {
        ctx.err(ep + ".j_grid", "must be strictly increasing");
        break;
      }
    cfg.amplitude = ctx.num(ej, ep, "amplitude", 0.25);
    if (!(cfg.amplitude >= 0.0)) ctx.err(ep + ".amplitude", "must be >= 0");
    const auto mf = ctx.integer(ej, ep, "mref_factor", 16);
    if (mf < 1)
      ctx.err(ep + ".mref_factor", "must be >= 1");
    else
      cfg.mref_factor = std::size_t(mf);
    const auto me = ctx.integer(ej, ep, "M_equiv", 10000);
    if (me < 2)
      ctx.err(ep + ".M_equiv", "must be >= 2");
    else
      cfg.M_equiv = std::size_t(me);
    cfg.equiv_threshold = ctx.num(ej, ep, "equiv_threshold", 0.05);
    if (!(cfg.equiv_threshold > 0.0))
      ctx.err(ep + ".equiv_threshold", "must be > 0");
    cfg.chaos_slope_threshold =
        ctx.num(ej, ep, "chaos_slope_threshold", -0.35);
    const auto st = ctx.integer(ej, ep, "snapshot_stride", 0);
    if (st < 0)
      ctx.err(ep + ".snapshot_stride", "must be >= 0");
    else
      cfg.snapshot_stride = std::size_t(st);
  }

  // experiment-specific requirements
  if (cfg.experiment == "chaos_rate" && cfg.N_grid.size() < 2)
    ctx.err("config.experiment_params.N_grid",
            "chaos_rate needs an increasing N grid (>= 2 entries)");
  if (cfg.experiment == "gamma_gap" && cfg.N_grid.empty())
    ctx.err("config.experiment_params.N_grid", "gamma_gap needs an N grid");
  if (cfg.experiment == "stability" && cfg.j_grid.empty())
    ctx.err("config.experiment_params.j_grid", "stability needs a j grid");

  if (!ctx.errors.empty()) throw ConfigError(std::move(ctx.errors));
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("config file '" + path +
                             "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const json& j) { return fnv1a_hex(j.dump()); }

ExperimentSetup ExperimentConfig::setup() const {
  if (!kernels || !init)
    throw std::logic_error("ExperimentConfig: not fully parsed");
  return ExperimentSetup{*init,    Y0,       m,    T,      dt,
                         *kernels, NoiseLevel(sigma), controls, cost,
                         picard,   M,        replicas};
}

}  // namespace herdsim
