#pragma once

#include <cstdint>
#include <vector>

#include "herdsim/control.hpp"
#include "herdsim/mckean_vlasov.hpp"
#include "herdsim/particle_system.hpp"

namespace herdsim {

/// Clamped tracking Lagrangian
///   L(t, Y, mu) = int min(|x - x*|^2, R^2) dmu
///               + beta * sum_i min(|Y^i - y*_i|^2, R^2).
/// The clamp radius makes L bounded and 2R-Lipschitz in mu along W1.
struct Lagrangian {
  std::vector<double> x_star;              // d
  std::vector<double> y_star;              // m * d, row-major
  double clamp_radius = 4.0;               // R
  double beta = 1.0;
  bool zero = false;                       // L identically 0
  double constant = 0.0;                   // added to every evaluation

  double eval(const EmpiricalMeasure& mu,
              std::span<const double> herders) const;
  double eval_uniform(std::span<const double> coords, std::size_t count,
                      std::size_t dim, std::span<const double> herders) const;
};

/// Control cost Psi(h, g-values) = lambda * sum_i ||h^i||_1
///                               + kappa * sum_i |g^i(mu)|,
/// with an optional squared-Frobenius h-norm for smooth-optimizer baselines.
/// Convex in h either way.
struct ControlPenalty {
  enum class HNorm { l1, frobenius_sq };
  double lambda = 0.0;
  double kappa = 0.0;
  HNorm h_norm = HNorm::l1;

  double eval(const std::vector<ControlLaw>& controls, double t,
              std::span<const double> g_values_flat) const;
};

struct CostSpec {
  Lagrangian lagrangian;
  ControlPenalty psi;
};

struct CostEstimate {
  double value = 0.0;        // replica average
  double std_error = 0.0;    // replica standard error (0 for one replica)
  std::vector<double> per_replica;
};

/// Discrete cost functional F_N: R seeded runs of the N-particle system,
/// trapezoid rule in time for the running cost, replica average returned
/// with its standard error. Replica r uses derive_seed(seed, r).
CostEstimate eval_FN(const InitialLaw& init, const std::vector<double>& Y0,
                     std::size_t m, std::size_t N, double T, double dt,
                     const KernelSet& kernels,
                     const std::vector<ControlLaw>& controls,
                     const CostSpec& cost, std::size_t replicas,
                     std::uint64_t seed, NoiseLevel noise);

/// Limit cost functional F along the McKean-Vlasov solution; deterministic
/// up to the ensemble approximation of the law, so no outer expectation.
double eval_F(const InitialLaw& init, const std::vector<double>& Y0,
              std::size_t m, double T, double dt, const KernelSet& kernels,
              const std::vector<ControlLaw>& controls, const CostSpec& cost,
              std::size_t M, std::uint64_t seed, NoiseLevel noise,
              PicardConfig picard = {});

/// Running cost integrated along an existing trajectory (trapezoid rule);
/// shared by eval_FN, eval_F and the experiment drivers.
double integrate_cost_particle(const Trajectory& traj,
                               const std::vector<ControlLaw>& controls,
                               const CostSpec& cost);
double integrate_cost_flow(const LawFlow& flow,
                           const std::vector<std::vector<double>>& herders,
                           const std::vector<ControlLaw>& controls,
                           const CostSpec& cost);

}  // namespace herdsim
