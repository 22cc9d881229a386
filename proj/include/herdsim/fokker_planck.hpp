#pragma once

#include <cstddef>
#include <vector>

#include "herdsim/control.hpp"
#include "herdsim/kernels.hpp"
#include "herdsim/mckean_vlasov.hpp"
#include "herdsim/particle_system.hpp"

namespace herdsim {

struct GridSpec {
  double x_min, x_max;
  std::size_t n_cells;
};

/// Cell-averaged probability density on a uniform 1-d grid. Mass must be 1
/// within 1e-8 and cells nonnegative (the scheme tolerates roundoff down to
/// -1e-12).
class GridDensity {
 public:
  GridDensity(double x_min, double x_max, std::vector<double> rho);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t cells() const { return rho_.size(); }
  double dx() const { return (x_max_ - x_min_) / double(rho_.size()); }
  double center(std::size_t i) const {
    return x_min_ + (double(i) + 0.5) * dx();
  }
  const std::vector<double>& rho() const { return rho_; }

  double mass() const;
  double mean() const;
  double variance() const;

  /// One atom per cell at the cell center, weight rho_i * dx.
  EmpiricalMeasure to_measure() const;

  /// Midpoint discretization of a law with a density, renormalized to unit
  /// mass on the grid. Throws if the law has no density (sampler-only laws).
  static GridDensity from_law(const InitialLaw& law, const GridSpec& grid);

 private:
  double x_min_, x_max_;
  std::vector<double> rho_;
};

struct EntropyReport {
  double value;  // sum of rho_i log rho_i dx over cells with rho_i > 0
};

EntropyReport entropy(const GridDensity& rho);

struct FpConfig {
  double cfl_safety = 0.45;    // in (0, 1]; <= 0.5 keeps the scheme monotone
  std::size_t n_snapshots = 101;
  double v_max = 1e3;          // velocity bound; beyond it the domain is
                               // declared too small
};

struct FpSolution {
  std::vector<double> times;
  std::vector<GridDensity> densities;
  std::vector<std::vector<double>> herders;  // per snapshot, m values (d = 1)
  std::size_t total_steps = 0;

  /// Density linearly interpolated in time, as a measure (atom per cell).
  EmpiricalMeasure measure_at(double t) const;
};

/// Finite-volume solver for the 1-d nonlinear Fokker-Planck / herder-ODE
/// system: upwind advection with velocity H1 * mu + (1/m) sum K1(Y^j - x),
/// centered diffusion sigma, explicit stepping under the CFL bound
/// dt = cfl_safety * min(dx / max|v|, dx^2 / (2 sigma)), herders advanced by
/// Heun with grid quadrature. Controls read the current grid measure.
FpSolution solve_fp(const GridDensity& rho0, const std::vector<double>& Y0,
                    std::size_t m, double T, const KernelSet& kernels,
                    const std::vector<ControlLaw>& controls, NoiseLevel noise,
                    FpConfig cfg = {});

/// Max over the ensemble grid of W1 between the PDE density (interpolated in
/// time) and the ensemble snapshots. Both runs must share (kernels,
/// controls, sigma, initial law); the FP horizon must cover the flow's.
double equivalence_check(const FpSolution& fp, const LawFlow& mkv);

}  // namespace herdsim
