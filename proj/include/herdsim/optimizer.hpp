#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "herdsim/cost.hpp"

namespace herdsim {

/// Finite-dimensional chart of the control class: the flattened h values of
/// every herder (box-constrained to U) followed, optionally, by the g
/// dictionary parameters (box-constrained to [-g_bound, g_bound]).
class ControlParameterization {
 public:
  ControlParameterization(std::vector<ControlLaw> prototype, bool optimize_g,
                          double g_bound = 1.0);

  std::size_t dim() const;
  std::vector<double> lower() const;
  std::vector<double> upper() const;
  /// Packed parameters of the prototype controls.
  std::vector<double> initial() const;
  /// Component-wise projection onto the box; idempotent.
  void project(std::span<double> params) const;
  std::vector<ControlLaw> build(std::span<const double> params) const;

  const std::vector<ControlLaw>& prototype() const { return prototype_; }

 private:
  std::vector<ControlLaw> prototype_;
  bool optimize_g_;
  double g_bound_;
};

enum class SearchMethod { nelder_mead, pattern };

struct MinimizeOptions {
  std::size_t budget = 500;
  SearchMethod method = SearchMethod::nelder_mead;
  double initial_step = 0.25;  // fraction of each box half-width
  std::uint64_t seed = 0;      // keys restart jitter only
};

struct OptimizationReport {
  std::vector<double> best_params;
  double best_value = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> trace;  // best-so-far value after each evaluation
  double std_error_at_optimum = 0.0;
  std::size_t restarts = 0;
};

/// Derivative-free minimization over a box. Every candidate is projected
/// onto the box before evaluation, so the objective only ever sees feasible
/// points; deterministic given (init, options). Nelder-Mead uses the
/// dimension-adapted coefficients and restarts around the incumbent when the
/// simplex collapses; pattern search is the plain coordinate walk with step
/// halving.
OptimizationReport minimize(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> lower, std::span<const double> upper,
    std::span<const double> init, const MinimizeOptions& opts);

/// Shared problem bundle for the experiment drivers.
struct ExperimentSetup {
  InitialLaw init;
  std::vector<double> Y0;  // m * d
  std::size_t m;
  double T, dt;
  KernelSet kernels;
  NoiseLevel noise;
  std::vector<ControlLaw> controls;
  CostSpec cost;
  PicardConfig picard{};
  std::size_t M_limit = 2000;  // ensemble size for F and stability runs
  std::size_t replicas = 2;    // Monte Carlo replicas for F_N
};

struct GammaGapRow {
  std::size_t N;
  double min_FN, min_F, gap, std_error;
};

/// Minimize F_N for each N and F once, with matched budgets and common
/// random numbers (one fixed replica seed block for every candidate), and
/// report the gaps |min F_N - min F|.
std::vector<GammaGapRow> gamma_gap_experiment(
    const ExperimentSetup& setup, const std::vector<std::size_t>& N_grid,
    const MinimizeOptions& opts, bool optimize_g, std::uint64_t seed);

struct StabilityRow {
  std::size_t j;
  double deviation;  // max_t W1 + max_i sup_t herder deviation
};

/// Stability of the limit system under weak-but-not-strong control
/// convergence: perturb h by the square wave A sign(sin(2 pi j t / T)) and
/// solve with identical tapes; the deviation must vanish as j grows.
std::vector<StabilityRow> stability_experiment(
    const ExperimentSetup& setup, const std::vector<std::size_t>& j_grid,
    double amplitude, std::uint64_t seed);

/// The j-th perturbed control set (exposed for tests).
std::vector<ControlLaw> square_wave_perturbation(
    const std::vector<ControlLaw>& base, std::size_t j, double amplitude);

}  // namespace herdsim
