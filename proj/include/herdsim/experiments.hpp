#pragma once

#include <cstdint>
#include <vector>

#include "herdsim/fokker_planck.hpp"
#include "herdsim/optimizer.hpp"

namespace herdsim {

/// Median of a non-empty sample (average of the middle pair for even sizes).
double median(std::vector<double> values);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ChaosRateResult {
  std::vector<std::size_t> N_grid;
  std::vector<std::vector<double>> errors;  // [grid index][replica]
  std::vector<double> medians;
  double slope = 0.0;  // log-log fit of median error vs N
};

/// Coupled propagation-of-chaos errors over an N grid with replica seeds
/// derive_seed(seed, r); M_ref = mref_factor * max N.
ChaosRateResult chaos_rate_experiment(const ExperimentSetup& setup,
                                      const std::vector<std::size_t>& N_grid,
                                      std::size_t replicas, std::uint64_t seed,
                                      std::size_t mref_factor = 16);

struct EquivalenceResult {
  bool hypothesis_verifiable = false;
  std::string hypothesis_note;
  double entropy_rho0 = 0.0;
  double second_moment_rho0 = 0.0;
  double distance = 0.0;  // max-over-time W1, valid when verifiable
  std::size_t fp_steps = 0;
  int picard_iterations = 0;
};

/// Cross-validate the PDE and ensemble solvers on one configuration. When the
/// initial law has no density the Fokker-Planck hypotheses cannot be checked
/// and the comparison is skipped, reported as not verifiable.
EquivalenceResult equivalence_experiment(const ExperimentSetup& setup,
                                         const GridSpec& grid,
                                         std::size_t M_ensemble,
                                         std::uint64_t seed,
                                         FpConfig fp_cfg = {});

/// sup over time nodes of the p-th moment of the flow's snapshots.
double sup_moment(const LawFlow& flow, MomentOrder p);

}  // namespace herdsim
