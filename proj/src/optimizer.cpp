#include "herdsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "herdsim/rng.hpp"

namespace herdsim {

ControlParameterization::ControlParameterization(
    std::vector<ControlLaw> prototype, bool optimize_g, double g_bound)
    : prototype_(std::move(prototype)),
      optimize_g_(optimize_g),
      g_bound_(g_bound) {
  if (prototype_.empty())
    throw std::invalid_argument("ControlParameterization: no controls");
  if (!(g_bound_ > 0.0))
    throw std::invalid_argument("ControlParameterization: g_bound <= 0");
}

std::size_t ControlParameterization::dim() const {
  std::size_t n = 0;
  for (const auto& law : prototype_) {
    n += law.h.values().size();
    if (optimize_g_) n += law.g.params().size();
  }
  return n;
}

std::vector<double> ControlParameterization::lower() const {
  std::vector<double> lo;
  lo.reserve(dim());
  for (const auto& law : prototype_) {
    lo.insert(lo.end(), law.h.values().size(), -law.h.u_max());
    if (optimize_g_) lo.insert(lo.end(), law.g.params().size(), -g_bound_);
  }
  return lo;
}

std::vector<double> ControlParameterization::upper() const {
  std::vector<double> hi;
  hi.reserve(dim());
  for (const auto& law : prototype_) {
    hi.insert(hi.end(), law.h.values().size(), law.h.u_max());
    if (optimize_g_) hi.insert(hi.end(), law.g.params().size(), g_bound_);
  }
  return hi;
}

std::vector<double> ControlParameterization::initial() const {
  std::vector<double> p;
  p.reserve(dim());
  for (const auto& law : prototype_) {
    p.insert(p.end(), law.h.values().begin(), law.h.values().end());
    if (optimize_g_)
      p.insert(p.end(), law.g.params().begin(), law.g.params().end());
  }
  return p;
}

void ControlParameterization::project(std::span<double> params) const {
  const auto lo = lower();
  const auto hi = upper();
  if (params.size() != lo.size())
    throw std::invalid_argument("ControlParameterization: bad params size");
  for (std::size_t k = 0; k < params.size(); ++k)
    params[k] = std::clamp(params[k], lo[k], hi[k]);
}

std::vector<ControlLaw> ControlParameterization::build(
    std::span<const double> params) const {
  if (params.size() != dim())
    throw std::invalid_argument("ControlParameterization: bad params size");
  std::vector<ControlLaw> laws;
  laws.reserve(prototype_.size());
  std::size_t off = 0;
  for (const auto& proto : prototype_) {
    const std::size_t nh = proto.h.values().size();
    std::vector<double> h_vals(params.begin() + off,
                               params.begin() + off + nh);
    off += nh;
    PiecewisePath h(std::move(h_vals), proto.h.intervals(), proto.h.dim(),
                    proto.h.ell(), proto.h.t_end(), proto.h.u_max());
    if (optimize_g_) {
      const std::size_t ng = proto.g.params().size();
      std::vector<double> g_params(params.begin() + off,
                                   params.begin() + off + ng);
      off += ng;
      auto g = proto.g.kind() == GFunctional::Kind::constant
                   ? GFunctional::constant(std::move(g_params), proto.g.dim())
                   : GFunctional::tanh_statistic(std::move(g_params),
                                                 proto.g.dim());
      laws.emplace_back(std::move(h), std::move(g));
    } else {
      laws.emplace_back(std::move(h), proto.g);
    }
  }
  return laws;
}

namespace {

class BudgetedObjective {
 public:
  BudgetedObjective(const std::function<double(std::span<const double>)>& fn,
                    std::size_t budget)
      : fn_(fn), budget_(budget) {}

  bool exhausted() const { return evaluations_ >= budget_; }
  std::size_t evaluations() const { return evaluations_; }
  const std::vector<double>& trace() const { return trace_; }
  double best_value() const { return best_value_; }
  const std::vector<double>& best_params() const { return best_params_; }

  // returns +inf once the budget is spent so callers can unwind
  double operator()(std::span<const double> x) {
    if (exhausted()) return std::numeric_limits<double>::infinity();
    ++evaluations_;
    const double f = fn_(x);
    if (trace_.empty() || f < best_value_) {
      best_value_ = f;
      best_params_.assign(x.begin(), x.end());
    }
    trace_.push_back(best_value_);
    return f;
  }

 private:
  const std::function<double(std::span<const double>)>& fn_;
  std::size_t budget_;
  std::size_t evaluations_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::vector<double> best_params_;
  std::vector<double> trace_;
};

struct Box {
  std::span<const double> lo, hi;
  void project(std::vector<double>& x) const {
    for (std::size_t k = 0; k < x.size(); ++k)
      x[k] = std::clamp(x[k], lo[k], hi[k]);
  }
  double half_width(std::size_t k) const { return 0.5 * (hi[k] - lo[k]); }
};

// Nelder-Mead with the Gao-Han dimension-adapted coefficients, candidates
// projected onto the box. Returns true if it stopped because the simplex
// collapsed (caller restarts around the incumbent).
bool nelder_mead_pass(BudgetedObjective& obj, const Box& box,
                      std::vector<double> start, double step_frac) {
  const std::size_t n = start.size();
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / double(n);
  const double gamma = 0.75 - 0.5 / double(n);
  const double delta = 1.0 - 1.0 / double(n);

  std::vector<std::vector<double>> simplex;
  std::vector<double> fvals;
  auto push_vertex = [&](std::vector<double> v) {
    box.project(v);
    fvals.push_back(obj(v));
    simplex.push_back(std::move(v));
  };
  push_vertex(start);
  for (std::size_t k = 0; k < n; ++k) {
    auto v = simplex[0];
    const double s = step_frac * box.half_width(k);
    v[k] += v[k] + s <= box.hi[k] ? s : -s;
    push_vertex(std::move(v));
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), cand(n);
  while (!obj.exhausted()) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    const std::size_t best = order[0], worst = order[n];
    const std::size_t second_worst = order[n - 1];

    // collapsed simplex: all vertices (numerically) coincide
    double diam = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t v = 1; v <= n; ++v)
        diam = std::max(diam, std::abs(simplex[order[v]][k] - simplex[best][k]));
    double fspread = fvals[worst] - fvals[best];
    if (diam < 1e-12 || fspread < 1e-14 * (1.0 + std::abs(fvals[best])))
      return true;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[v]][k];
    for (double& c : centroid) c /= double(n);

    auto blend = [&](double coef) {
      for (std::size_t k = 0; k < n; ++k)
        cand[k] = centroid[k] + coef * (centroid[k] - simplex[worst][k]);
      box.project(cand);
    };

    blend(alpha);
    const double fr = obj(cand);
    if (fr < fvals[best]) {
      auto reflected = cand;
      blend(beta);
      const double fe = obj(cand);
      if (fe < fr) {
        simplex[worst] = cand;
        fvals[worst] = fe;
      } else {
        simplex[worst] = reflected;
        fvals[worst] = fr;
      }
    } else if (fr < fvals[second_worst]) {
      simplex[worst] = cand;
      fvals[worst] = fr;
    } else {
      const bool outside = fr < fvals[worst];
      blend(outside ? gamma : -gamma);
      const double fc = obj(cand);
      if (fc < std::min(fr, fvals[worst])) {
        simplex[worst] = cand;
        fvals[worst] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t v = 0; v <= n; ++v) {
          if (v == best) continue;
          for (std::size_t k = 0; k < n; ++k)
            simplex[v][k] =
                simplex[best][k] + delta * (simplex[v][k] - simplex[best][k]);
          box.project(simplex[v]);
          fvals[v] = obj(simplex[v]);
        }
      }
    }
  }
  return false;
}

bool pattern_search_pass(BudgetedObjective& obj, const Box& box,
                         std::vector<double> x, double step_frac) {
  const std::size_t n = x.size();
  box.project(x);
  double fx = obj(x);
  std::vector<double> step(n);
  for (std::size_t k = 0; k < n; ++k)
    step[k] = step_frac * box.half_width(k);
  while (!obj.exhausted()) {
    bool improved = false;
    for (std::size_t k = 0; k < n && !obj.exhausted(); ++k) {
      for (const double sgn : {+1.0, -1.0}) {
        auto cand = x;
        cand[k] = std::clamp(cand[k] + sgn * step[k], box.lo[k], box.hi[k]);
        if (cand[k] == x[k]) continue;
        const double f = obj(cand);
        if (f < fx) {
          x = std::move(cand);
          fx = f;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      double maxstep = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        step[k] *= 0.5;
        maxstep = std::max(maxstep, step[k]);
      }
      if (maxstep < 1e-12) return true;
    }
  }
  return false;
}

}  // namespace

OptimizationReport minimize(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> lower, std::span<const double> upper,
    std::span<const double> init, const MinimizeOptions& opts) {
  const std::size_t n = init.size();
  if (n == 0) throw std::invalid_argument("minimize: empty parameter vector");
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("minimize: box size mismatch");
  for (std::size_t k = 0; k < n; ++k)
    if (!(lower[k] <= upper[k]))
      throw std::invalid_argument("minimize: inverted box");
  if (opts.budget < n + 2)
    throw std::invalid_argument(
        "minimize: budget below dimension + 2 (cannot build a simplex)");

  Box box{lower, upper};
  BudgetedObjective obj(objective, opts.budget);
  CounterRng jitter(derive_seed(opts.seed, 0x6f7074));

  std::vector<double> start(init.begin(), init.end());
  box.project(start);
  double step = opts.initial_step;
  std::size_t restarts = 0;
  std::uint64_t round = 0;
  while (!obj.exhausted()) {
    const bool collapsed =
        opts.method == SearchMethod::nelder_mead
            ? nelder_mead_pass(obj, box, start, step)
            : pattern_search_pass(obj, box, start, step);
    if (!collapsed) break;  // budget exhausted inside the pass
    ++restarts;
    // restart around the incumbent with a finer simplex and a small
    // deterministic jitter so a degenerate configuration is not rebuilt
    start = obj.best_params();
    step = std::max(step * 0.25, 1e-9);
    for (std::size_t k = 0; k < n; ++k) {
      const double eps = 0.05 * step * box.half_width(k);
      start[k] += eps * (2.0 * jitter.uniform(round, k) - 1.0);
    }
    box.project(start);
    ++round;
  }

  OptimizationReport report;
  report.best_params = obj.best_params();
  report.best_value = obj.best_value();
  report.evaluations = obj.evaluations();
  report.trace = obj.trace();
  report.restarts = restarts;
  return report;
}

std::vector<ControlLaw> square_wave_perturbation(
    const std::vector<ControlLaw>& base, std::size_t j, double amplitude) {
  if (j < 1) throw std::invalid_argument("square_wave_perturbation: j >= 1");
  std::vector<ControlLaw> out;
  out.reserve(base.size());
  for (const auto& law : base) {
    const std::size_t K = std::lcm(law.h.intervals(), 2 * j);
    const double T = law.h.t_end();
    const std::size_t cell = static_cast<std::size_t>(law.h.dim()) * law.h.ell();
    std::vector<double> values(K * cell);
    for (std::size_t s = 0; s < K; ++s) {
      const double t_mid = (double(s) + 0.5) * T / double(K);
      const double phase = t_mid / T * double(j);
      const double wave = (phase - std::floor(phase)) < 0.5 ? 1.0 : -1.0;
      const auto h_base = law.h.at(t_mid);
      for (std::size_t q = 0; q < cell; ++q)
        values[s * cell + q] = std::clamp(h_base[q] + amplitude * wave,
                                          -law.h.u_max(), law.h.u_max());
    }
    out.emplace_back(PiecewisePath(std::move(values), K, law.h.dim(),
                                   law.h.ell(), T, law.h.u_max()),
                     law.g);
  }
  return out;
}

std::vector<StabilityRow> stability_experiment(
    const ExperimentSetup& setup, const std::vector<std::size_t>& j_grid,
    double amplitude, std::uint64_t seed) {
  const auto base =
      solve_mkv(setup.init, setup.Y0, setup.m, setup.T, setup.dt,
                setup.kernels, setup.controls, setup.M_limit, seed,
                setup.noise, setup.picard);
  std::vector<StabilityRow> rows;
  rows.reserve(j_grid.size());
  const std::size_t dd = static_cast<std::size_t>(base.flow.dim());
  for (const std::size_t j : j_grid) {
    const auto perturbed = square_wave_perturbation(setup.controls, j, amplitude);
    const auto sol =
        solve_mkv(setup.init, setup.Y0, setup.m, setup.T, setup.dt,
                  setup.kernels, perturbed, setup.M_limit, seed, setup.noise,
                  setup.picard);
    double w1 = 0.0;
    for (std::size_t k = 0; k < base.flow.nodes(); ++k)
      w1 = std::max(w1, detail::snapshot_distance(
                            sol.flow.states(k), base.flow.states(k),
                            base.flow.members(), base.flow.dim()));
    double herd = 0.0;
    for (std::size_t k = 0; k < base.flow.nodes(); ++k) {
      for (std::size_t i = 0; i < setup.m; ++i) {
        double r2 = 0.0;
        for (std::size_t c = 0; c < dd; ++c) {
          const double dy =
              sol.herders[k][i * dd + c] - base.herders[k][i * dd + c];
          r2 += dy * dy;
        }
        herd = std::max(herd, std::sqrt(r2));
      }
    }
    rows.push_back({j, w1 + herd});
  }
  return rows;
}

std::vector<GammaGapRow> gamma_gap_experiment(
    const ExperimentSetup& setup, const std::vector<std::size_t>& N_grid,
    const MinimizeOptions& opts, bool optimize_g, std::uint64_t seed) {
  ControlParameterization param(setup.controls, optimize_g);
  const auto lo = param.lower();
  const auto hi = param.upper();
  const auto init = param.initial();

  // one seed block shared by every candidate: common random numbers
  const std::uint64_t crn_seed = derive_seed(seed, 0xC12);

  const auto objective_F = [&](std::span<const double> p) {
    return eval_F(setup.init, setup.Y0, setup.m, setup.T, setup.dt,
                  setup.kernels, param.build(p), setup.cost, setup.M_limit,
                  crn_seed, setup.noise, setup.picard);
  };
  const auto report_F = minimize(objective_F, lo, hi, init, opts);

  std::vector<GammaGapRow> rows;
  rows.reserve(N_grid.size());
  for (const std::size_t N : N_grid) {
    const auto objective_N = [&](std::span<const double> p) {
      return eval_FN(setup.init, setup.Y0, setup.m, N, setup.T, setup.dt,
                     setup.kernels, param.build(p), setup.cost,
                     setup.replicas, crn_seed, setup.noise)
          .value;
    };
    const auto report_N = minimize(objective_N, lo, hi, init, opts);
    const auto at_best =
        eval_FN(setup.init, setup.Y0, setup.m, N, setup.T, setup.dt,
                setup.kernels, param.build(report_N.best_params), setup.cost,
                setup.replicas, crn_seed, setup.noise);
    rows.push_back({N, report_N.best_value, report_F.best_value,
                    std::abs(report_N.best_value - report_F.best_value),
                    at_best.std_error});
  }
  return rows;
}

}  // namespace herdsim
