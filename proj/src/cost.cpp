#include "herdsim/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace herdsim {

namespace {

double clamped_sq(std::span<const double> x, const double* target,
                  std::size_t d, double r2) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double dx = x[k] - target[k];
    s += dx * dx;
  }
  return std::min(s, r2);
}

}  // namespace

double Lagrangian::eval_uniform(std::span<const double> coords,
                                std::size_t count, std::size_t dim,
                                std::span<const double> herders) const {
  if (zero) return constant;
  if (x_star.size() != dim)
    throw std::invalid_argument("Lagrangian: x_star dimension mismatch");
  const double r2 = clamp_radius * clamp_radius;
  double follower = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    follower += clamped_sq({coords.data() + i * dim, dim}, x_star.data(), dim, r2);
  follower /= double(count);
  double herd = 0.0;
  const std::size_t m = herders.size() / dim;
  if (y_star.size() != herders.size())
    throw std::invalid_argument("Lagrangian: y_star size mismatch");
  for (std::size_t i = 0; i < m; ++i)
    herd += clamped_sq({herders.data() + i * dim, dim},
                       y_star.data() + i * dim, dim, r2);
  return follower + beta * herd + constant;
}

double Lagrangian::eval(const EmpiricalMeasure& mu,
                        std::span<const double> herders) const {
  if (zero) return constant;
  const std::size_t d = mu.dim();
  if (x_star.size() != d)
    throw std::invalid_argument("Lagrangian: x_star dimension mismatch");
  const double r2 = clamp_radius * clamp_radius;
  double follower = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    follower += mu.weight(i) * clamped_sq(mu.point(i), x_star.data(), d, r2);
  double herd = 0.0;
  const std::size_t m = herders.size() / d;
  if (y_star.size() != herders.size())
    throw std::invalid_argument("Lagrangian: y_star size mismatch");
  for (std::size_t i = 0; i < m; ++i)
    herd += clamped_sq({herders.data() + i * d, d}, y_star.data() + i * d, d, r2);
  return follower + beta * herd + constant;
}

double ControlPenalty::eval(const std::vector<ControlLaw>& controls, double t,
                            std::span<const double> g_values_flat) const {
  double s = 0.0;
  if (lambda != 0.0) {
    double hn = 0.0;
    for (const auto& law : controls)
      hn += h_norm == HNorm::l1 ? law.h.l1_norm_at(t)
                                : law.h.frobenius_sq_at(t);
    s += lambda * hn;
  }
  if (kappa != 0.0) {
    std::size_t off = 0;
    for (const auto& law : controls) {
      double g2 = 0.0;
      for (std::size_t k = 0; k < law.g.ell(); ++k) {
        const double v = g_values_flat[off + k];
        g2 += v * v;
      }
      off += law.g.ell();
      s += kappa * std::sqrt(g2);
    }
  }
  return s;
}

namespace {

// trapezoid weights on the uniform grid
double trapezoid(const std::vector<double>& samples, double dt) {
  if (samples.size() < 2) return 0.0;
  double s = 0.5 * (samples.front() + samples.back());
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) s += samples[k];
  return s * dt;
}

std::size_t total_ell(const std::vector<ControlLaw>& controls) {
  std::size_t n = 0;
  for (const auto& law : controls) n += law.g.ell();
  return n;
}

}  // namespace

double integrate_cost_particle(const Trajectory& traj,
                               const std::vector<ControlLaw>& controls,
                               const CostSpec& cost) {
  const std::size_t dim = static_cast<std::size_t>(traj.d);
  std::vector<double> samples(traj.nodes());
  std::vector<double> g_flat(total_ell(controls));
  for (std::size_t k = 0; k < traj.nodes(); ++k) {
    const double t = traj.times[k];
    std::size_t off = 0;
    for (const auto& law : controls) {
      law.g.eval_uniform(traj.X[k], traj.N,
                         {g_flat.data() + off, law.g.ell()});
      off += law.g.ell();
    }
    samples[k] = cost.lagrangian.eval_uniform(traj.X[k], traj.N, dim,
                                              traj.Y[k]) +
                 cost.psi.eval(controls, t, g_flat);
  }
  return trapezoid(samples, traj.dt);
}

double integrate_cost_flow(const LawFlow& flow,
                           const std::vector<std::vector<double>>& herders,
                           const std::vector<ControlLaw>& controls,
                           const CostSpec& cost) {
  if (herders.size() != flow.nodes())
    throw std::invalid_argument("integrate_cost_flow: grid mismatch");
  const std::size_t dim = static_cast<std::size_t>(flow.dim());
  std::vector<double> samples(flow.nodes());
  std::vector<double> g_flat(total_ell(controls));
  for (std::size_t k = 0; k < flow.nodes(); ++k) {
    const double t = flow.time(k);
    std::size_t off = 0;
    for (const auto& law : controls) {
      law.g.eval_uniform(flow.states(k), flow.members(),
                         {g_flat.data() + off, law.g.ell()});
      off += law.g.ell();
    }
    samples[k] =
        cost.lagrangian.eval_uniform(flow.states(k), flow.members(), dim,
                                     herders[k]) +
        cost.psi.eval(controls, t, g_flat);
  }
  return trapezoid(samples, flow.dt());
}

CostEstimate eval_FN(const InitialLaw& init, const std::vector<double>& Y0,
                     std::size_t m, std::size_t N, double T, double dt,
                     const KernelSet& kernels,
                     const std::vector<ControlLaw>& controls,
                     const CostSpec& cost, std::size_t replicas,
                     std::uint64_t seed, NoiseLevel noise) {
  if (replicas < 1) throw std::invalid_argument("eval_FN: replicas >= 1");
  if (controls.size() != m)
    throw std::invalid_argument("eval_FN: need one control per herder");
  CostEstimate est;
  est.per_replica.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    const std::uint64_t rs = derive_seed(seed, r);
    const auto state0 = draw_initial_state(init, Y0, N, m, init.dim(), rs);
    const auto traj =
        simulate(state0, T, dt, kernels, controls, rs, noise, /*dt_max=*/dt);
    est.per_replica.push_back(integrate_cost_particle(traj, controls, cost));
  }
  double mean = 0.0;
  for (double v : est.per_replica) mean += v;
  mean /= double(replicas);
  est.value = mean;
  if (replicas > 1) {
    double var = 0.0;
    for (double v : est.per_replica) var += (v - mean) * (v - mean);
    var /= double(replicas - 1);
    est.std_error = std::sqrt(var / double(replicas));
  }
  return est;
}

double eval_F(const InitialLaw& init, const std::vector<double>& Y0,
              std::size_t m, double T, double dt, const KernelSet& kernels,
              const std::vector<ControlLaw>& controls, const CostSpec& cost,
              std::size_t M, std::uint64_t seed, NoiseLevel noise,
              PicardConfig picard) {
  if (controls.size() != m)
    throw std::invalid_argument("eval_F: need one control per herder");
  const auto sol =
      solve_mkv(init, Y0, m, T, dt, kernels, controls, M, seed, noise, picard);
  return integrate_cost_flow(sol.flow, sol.herders, controls, cost);
}

}  // namespace herdsim
