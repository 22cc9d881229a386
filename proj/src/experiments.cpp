#include "herdsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "herdsim/rng.hpp"

namespace herdsim {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_slope: need >= 2 points");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ChaosRateResult chaos_rate_experiment(const ExperimentSetup& setup,
                                      const std::vector<std::size_t>& N_grid,
                                      std::size_t replicas, std::uint64_t seed,
                                      std::size_t mref_factor) {
  if (N_grid.empty() || replicas < 1)
    throw std::invalid_argument("chaos_rate_experiment: empty grid");
  for (std::size_t i = 1; i < N_grid.size(); ++i)
    if (N_grid[i] <= N_grid[i - 1])
      throw std::invalid_argument("chaos_rate_experiment: N grid must increase");
  const std::size_t M_ref = mref_factor * N_grid.back();

  ChaosRateResult res;
  res.N_grid = N_grid;
  res.errors.assign(N_grid.size(), {});
  for (std::size_t r = 0; r < replicas; ++r) {
    const std::uint64_t rs = derive_seed(seed, r);
    for (std::size_t gi = 0; gi < N_grid.size(); ++gi) {
      const double err = coupled_chaos_run(
          setup.init, setup.Y0, setup.m, N_grid[gi], setup.dt, setup.T,
          setup.kernels, setup.controls, rs, setup.noise, M_ref, setup.picard);
      res.errors[gi].push_back(err);
    }
  }
  res.medians.reserve(N_grid.size());
  std::vector<double> lx, ly;
  for (std::size_t gi = 0; gi < N_grid.size(); ++gi) {
    res.medians.push_back(median(res.errors[gi]));
    lx.push_back(std::log(double(N_grid[gi])));
    ly.push_back(std::log(std::max(res.medians.back(), 1e-300)));
  }
  res.slope = fit_slope(lx, ly);
  return res;
}

EquivalenceResult equivalence_experiment(const ExperimentSetup& setup,
                                         const GridSpec& grid,
                                         std::size_t M_ensemble,
                                         std::uint64_t seed, FpConfig fp_cfg) {
  EquivalenceResult res;
  if (!setup.init.has_density()) {
    res.hypothesis_verifiable = false;
    res.hypothesis_note =
        "initial law is sampler-only (no density): the finite-entropy and "
        "W2 hypotheses cannot be verified, comparison skipped";
    return res;
  }
  const auto rho0 = GridDensity::from_law(setup.init, grid);
  res.entropy_rho0 = entropy(rho0).value;
  res.second_moment_rho0 = moment(rho0.to_measure(), MomentOrder(2.0));
  if (!std::isfinite(res.entropy_rho0) ||
      !std::isfinite(res.second_moment_rho0)) {
    res.hypothesis_verifiable = false;
    res.hypothesis_note = "initial density violates the finite entropy / "
                          "second moment hypotheses";
    return res;
  }
  res.hypothesis_verifiable = true;
  res.hypothesis_note = "finite entropy and second moment verified on rho0";

  const auto fp = solve_fp(rho0, setup.Y0, setup.m, setup.T, setup.kernels,
                           setup.controls, setup.noise, fp_cfg);
  res.fp_steps = fp.total_steps;
  const auto mkv =
      solve_mkv(setup.init, setup.Y0, setup.m, setup.T, setup.dt,
                setup.kernels, setup.controls, M_ensemble, seed, setup.noise,
                setup.picard);
  res.picard_iterations = mkv.iterations;
  res.distance = equivalence_check(fp, mkv.flow);
  return res;
}

double sup_moment(const LawFlow& flow, MomentOrder p) {
  double worst = 0.0;
  for (std::size_t k = 0; k < flow.nodes(); ++k)
    worst = std::max(worst, moment(flow.snapshot(k), p));
  return worst;
}

}  // namespace herdsim
