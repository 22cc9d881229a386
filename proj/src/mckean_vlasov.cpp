#include "herdsim/mckean_vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "herdsim/parallel.hpp"

namespace herdsim {

LawFlow::LawFlow(double dt, int d, std::size_t members, std::size_t nodes)
    : dt_(dt), d_(d), M_(members) {
  if (members < 1 || nodes < 1 || d < 1)
    throw std::invalid_argument("LawFlow: bad shape");
  states_.assign(nodes,
                 std::vector<double>(members * static_cast<std::size_t>(d)));
}

EmpiricalMeasure LawFlow::snapshot(std::size_t k) const {
  return EmpiricalMeasure::uniform(states_.at(k),
                                   static_cast<std::size_t>(d_));
}

std::vector<double> LawFlow::node_mean(std::size_t k) const {
  const std::size_t d = static_cast<std::size_t>(d_);
  std::vector<double> mean(d, 0.0);
  const auto& s = states_.at(k);
  for (std::size_t i = 0; i < M_; ++i)
    for (std::size_t c = 0; c < d; ++c) mean[c] += s[i * d + c];
  for (double& v : mean) v /= double(M_);
  return mean;
}

namespace detail {

double snapshot_distance(std::span<const double> a, std::span<const double> b,
                         std::size_t count, int d) {
  if (d == 1) {
    std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += std::abs(xa[i] - xb[i]);
    return s / double(count);
  }
  const std::size_t dd = static_cast<std::size_t>(d);
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < dd; ++c) {
      const double dx = a[i * dd + c] - b[i * dd + c];
      r2 += dx * dx;
    }
    s += std::sqrt(r2);
  }
  return s / double(count);
}

}  // namespace detail

namespace {

// Convolution of one kernel against each snapshot of a frozen flow. Linear
// kernels reduce to the per-node first moment, which keeps benchmark-size
// ensembles O(M) per sweep instead of O(M^2); other families do the direct
// O(M) sum per evaluation point.
class SnapshotConv {
 public:
  SnapshotConv(const LawFlow& flow, const KernelSpec& kernel)
      : flow_(flow), kernel_(kernel) {
    collapse_ = kernel_.family() == KernelFamily::linear && !kernel_.is_zero();
    if (collapse_) {
      const std::size_t d = static_cast<std::size_t>(flow_.dim());
      means_.resize(flow_.nodes() * d);
      for (std::size_t k = 0; k < flow_.nodes(); ++k) {
        const auto mean = flow_.node_mean(k);
        std::copy(mean.begin(), mean.end(), means_.begin() + k * d);
      }
    }
  }

  // (1/M) sum_i K(atom_i - x)
  void conv(std::size_t node, std::span<const double> x,
            std::span<double> out) const {
    if (kernel_.is_zero()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    if (collapse_) {
      const double a = kernel_.param_a();
      const double* mean = means_.data() + node * x.size();
      for (std::size_t c = 0; c < x.size(); ++c) out[c] = a * (mean[c] - x[c]);
      return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    kernel_.sum_atoms_minus(flow_.states(node), flow_.members(), x, out);
    for (double& v : out) v /= double(flow_.members());
  }

  // (1/M) sum_i K(y - atom_i)
  void conv_at(std::size_t node, std::span<const double> y,
               std::span<double> out) const {
    if (kernel_.is_zero()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    if (collapse_) {
      const double a = kernel_.param_a();
      const double* mean = means_.data() + node * y.size();
      for (std::size_t c = 0; c < y.size(); ++c) out[c] = a * (y[c] - mean[c]);
      return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    kernel_.sum_point_minus(flow_.states(node), flow_.members(), y, out);
    for (double& v : out) v /= double(flow_.members());
  }

 private:
  const LawFlow& flow_;
  const KernelSpec& kernel_;
  bool collapse_ = false;
  std::vector<double> means_;
};

struct Problem {
  const InitialLaw& init;
  const std::vector<double>& Y0;
  std::size_t m;
  double T, dt;
  const KernelSet& kernels;
  const std::vector<ControlLaw>& controls;
  NoiseLevel noise;
  int d;
  std::size_t n_steps;
};

// (b) of the sweep: herder ODE under a frozen flow, explicit Euler on the
// shared grid. Returns node -> m*d.
std::vector<std::vector<double>> integrate_herders(const Problem& pb,
                                                   const LawFlow& frozen) {
  const std::size_t d = static_cast<std::size_t>(pb.d);
  const double invm = 1.0 / double(pb.m);
  SnapshotConv conv_k2(frozen, pb.kernels.K2);

  std::vector<std::vector<double>> g_values;  // node -> herder-major ell blocks
  if (!pb.controls.empty()) {
    g_values.resize(frozen.nodes());
    for (std::size_t k = 0; k < frozen.nodes(); ++k) {
      auto& gv = g_values[k];
      for (const auto& law : pb.controls) {
        std::vector<double> out(law.g.ell());
        law.g.eval_uniform(frozen.states(k), frozen.members(), out);
        gv.insert(gv.end(), out.begin(), out.end());
      }
    }
  }

  std::vector<std::vector<double>> herders(pb.n_steps + 1);
  herders[0] = pb.Y0;
  std::vector<double> drift(pb.m * d), acc(d), u(d);
  for (std::size_t k = 0; k < pb.n_steps; ++k) {
    const auto& Y = herders[k];
    const double t = frozen.time(k);
    for (std::size_t i = 0; i < pb.m; ++i) {
      std::span<const double> yi{Y.data() + i * d, d};
      std::span<double> out{drift.data() + i * d, d};
      conv_k2.conv_at(k, yi, out);
      std::fill(acc.begin(), acc.end(), 0.0);
      pb.kernels.H2.sum_atoms_minus(Y, pb.m, yi, acc);
      for (std::size_t c = 0; c < d; ++c) out[c] += invm * acc[c];
      if (!pb.controls.empty()) {
        const auto& law = pb.controls[i];
        std::size_t off = 0;
        for (std::size_t q = 0; q < i; ++q) off += pb.controls[q].g.ell();
        law.eval_with_g(t, {g_values[k].data() + off, law.g.ell()}, u);
        for (std::size_t c = 0; c < d; ++c) out[c] += u[c];
      }
    }
    auto& next = herders[k + 1];
    next.resize(pb.m * d);
    for (std::size_t q = 0; q < next.size(); ++q)
      next[q] = Y[q] + pb.dt * drift[q];
  }
  return herders;
}

// (c): re-integrate the M follower paths under the frozen flow and herders,
// reusing each member's tape and initial draw.
void integrate_followers(const Problem& pb, const LawFlow& frozen,
                         const std::vector<std::vector<double>>& herders,
                         const BrownianTape& tape,
                         const std::vector<double>& init_states,
                         LawFlow& out) {
  const std::size_t d = static_cast<std::size_t>(pb.d);
  const std::size_t M = out.members();
  const double invm = 1.0 / double(pb.m);
  const double amp = std::sqrt(2.0 * pb.noise.sigma * pb.dt);
  SnapshotConv conv_h1(frozen, pb.kernels.H1);

  std::copy(init_states.begin(), init_states.end(),
            out.states_mut(0).begin());
  parallel_for(M, [&](std::size_t i) {
    std::vector<double> x(d), drift(d), herd(d);
    for (std::size_t c = 0; c < d; ++c) x[c] = init_states[i * d + c];
    for (std::size_t k = 0; k < pb.n_steps; ++k) {
      conv_h1.conv(k, x, drift);
      std::fill(herd.begin(), herd.end(), 0.0);
      pb.kernels.K1.sum_atoms_minus(herders[k], pb.m, x, herd);
      for (std::size_t c = 0; c < d; ++c) {
        x[c] += pb.dt * (drift[c] + invm * herd[c]);
        if (amp > 0.0) x[c] += amp * tape.increment(i, k, c, d);
      }
      auto dst = out.states_mut(k + 1);
      for (std::size_t c = 0; c < d; ++c) dst[i * d + c] = x[c];
    }
  });
  for (std::size_t k = 1; k <= pb.n_steps; ++k)
    for (double v : out.states(k))
      if (!std::isfinite(v))
        throw BlowupError(k, "mckean-vlasov ensemble blew up at node " +
                                 std::to_string(k));
}

double weighted_flow_distance(const LawFlow& a, const LawFlow& b,
                              double gamma) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.nodes(); ++k) {
    const double w = std::exp(-gamma * a.time(k));
    // skip nodes whose weight cannot move the max
    if (w * 1e6 < worst) continue;
    const double dist = detail::snapshot_distance(a.states(k), b.states(k),
                                                  a.members(), a.dim());
    worst = std::max(worst, w * dist);
  }
  return worst;
}

}  // namespace

MkvSolution solve_mkv(const InitialLaw& init, const std::vector<double>& Y0,
                      std::size_t m, double T, double dt,
                      const KernelSet& kernels,
                      const std::vector<ControlLaw>& controls, std::size_t M,
                      std::uint64_t seed, NoiseLevel noise, PicardConfig cfg) {
  if (M < 2) throw std::invalid_argument("solve_mkv: M must be >= 2");
  if (m < 1) throw std::invalid_argument("solve_mkv: m must be >= 1");
  const int d = init.dim();
  if (kernels.dim() != d)
    throw std::invalid_argument("solve_mkv: kernel dimension mismatch");
  if (Y0.size() != m * static_cast<std::size_t>(d))
    throw std::invalid_argument("solve_mkv: Y0 size != m*d");
  if (!controls.empty() && controls.size() != m)
    throw std::invalid_argument("solve_mkv: need one control per herder");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solve_mkv: tol <= 0");
  const std::size_t n_steps = step_count(T, dt);
  const double gamma = cfg.gamma < 0.0 ? 4.0 * kernels.L() : cfg.gamma;

  const std::size_t dd = static_cast<std::size_t>(d);
  BrownianTape tape(seed);
  std::vector<double> init_states(M * dd);
  for (std::size_t i = 0; i < M; ++i)
    init.sample(tape, i, {init_states.data() + i * dd, dd});

  Problem pb{init, Y0, m, T, dt, kernels, controls, noise, d, n_steps};

  // iterate from the constant-in-time initial flow
  LawFlow prev(dt, d, M, n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k)
    std::copy(init_states.begin(), init_states.end(),
              prev.states_mut(k).begin());

  std::vector<double> stopping;
  for (int r = 1; r <= cfg.max_iter; ++r) {
    auto herders = integrate_herders(pb, prev);
    LawFlow next(dt, d, M, n_steps + 1);
    integrate_followers(pb, prev, herders, tape, init_states, next);
    const double dist = weighted_flow_distance(next, prev, gamma);
    stopping.push_back(dist);
    if (dist < cfg.tol) {
      // one more herder pass so the returned trajectory matches the
      // returned flow, not its predecessor
      auto final_herders = integrate_herders(pb, next);
      MkvSolution sol{std::move(next), std::move(final_herders), r - 1,
                      std::move(stopping), gamma};
      return sol;
    }
    prev = std::move(next);
  }
  const std::size_t n = stopping.size();
  const double ratio = n >= 2 ? stopping[n - 1] / stopping[n - 2]
                              : std::numeric_limits<double>::infinity();
  throw PicardError(cfg.max_iter, ratio,
                    "solve_mkv: no convergence after " +
                        std::to_string(cfg.max_iter) +
                        " sweeps; last contraction ratio " +
                        std::to_string(ratio));
}

double coupled_chaos_run(const InitialLaw& init, const std::vector<double>& Y0,
                         std::size_t m, std::size_t N, double dt, double T,
                         const KernelSet& kernels,
                         const std::vector<ControlLaw>& controls,
                         std::uint64_t seed, NoiseLevel noise,
                         std::size_t M_ref, PicardConfig cfg) {
  if (M_ref < N)
    throw std::invalid_argument("coupled_chaos_run: M_ref must be >= N");
  const int d = init.dim();
  const std::size_t dd = static_cast<std::size_t>(d);

  const auto ref = solve_mkv(init, Y0, m, T, dt, kernels, controls, M_ref,
                             seed, noise, cfg);

  auto state0 = draw_initial_state(init, Y0, N, m, d, seed);
  const auto traj =
      simulate(state0, T, dt, kernels, controls, seed, noise, /*dt_max=*/dt);

  // limit copies share the first N tapes and initial draws of the reference
  const std::size_t n_steps = step_count(T, dt);
  const double invm = 1.0 / double(m);
  const double amp = std::sqrt(2.0 * noise.sigma * dt);
  BrownianTape tape(seed);
  SnapshotConv conv_h1(ref.flow, kernels.H1);

  std::vector<double> follower_err(N, 0.0);
  parallel_for(N, [&](std::size_t n) {
    std::vector<double> x(dd), drift(dd), herd(dd);
    init.sample(tape, n, x);
    double worst = 0.0;
    for (std::size_t k = 0; k <= n_steps; ++k) {
      double r2 = 0.0;
      const auto& Xk = traj.X[k];
      for (std::size_t c = 0; c < dd; ++c) {
        const double dx = x[c] - Xk[n * dd + c];
        r2 += dx * dx;
      }
      worst = std::max(worst, std::sqrt(r2));
      if (k == n_steps) break;
      conv_h1.conv(k, x, drift);
      std::fill(herd.begin(), herd.end(), 0.0);
      kernels.K1.sum_atoms_minus(ref.herders[k], m, x, herd);
      for (std::size_t c = 0; c < dd; ++c) {
        x[c] += dt * (drift[c] + invm * herd[c]);
        if (amp > 0.0) x[c] += amp * tape.increment(n, k, c, dd);
      }
    }
    follower_err[n] = worst;
  });

  double err_x = 0.0;
  for (double e : follower_err) err_x = std::max(err_x, e);

  double err_y = 0.0;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      double r2 = 0.0;
      for (std::size_t c = 0; c < dd; ++c) {
        const double dy = traj.Y[k][i * dd + c] - ref.herders[k][i * dd + c];
        r2 += dy * dy;
      }
      err_y = std::max(err_y, std::sqrt(r2));
    }
  }
  return err_x + err_y;
}

double law_distance(const LawFlow& a, const LawFlow& b) {
  if (a.dim() != b.dim() || a.nodes() != b.nodes() ||
      std::abs(a.dt() - b.dt()) > 1e-12 * std::max(1.0, a.dt()))
    throw std::invalid_argument("law_distance: time grids are incompatible");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.nodes(); ++k)
    worst = std::max(worst, wasserstein1(a.snapshot(k), b.snapshot(k)));
  return worst;
}

}  // namespace herdsim
