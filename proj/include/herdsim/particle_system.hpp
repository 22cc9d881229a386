#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "herdsim/control.hpp"
#include "herdsim/kernels.hpp"
#include "herdsim/measures.hpp"
#include "herdsim/rng.hpp"

namespace herdsim {

/// Diffusion coefficient sigma >= 0; the SDE noise amplitude is sqrt(2 sigma).
/// sigma = 0 is allowed for deterministic regression runs.
struct NoiseLevel {
  double sigma;
  explicit NoiseLevel(double s) : sigma(s) {
    if (!(s >= 0.0)) throw std::invalid_argument("NoiseLevel: sigma < 0");
  }
};

/// Replayable Brownian increments, keyed (seed, particle, step, component).
/// Draws are pure functions of the key, so any two runs with the same seed
/// see the same noise regardless of thread count, and the first n particle
/// tapes do not change when more particles are added.
class BrownianTape {
 public:
  explicit BrownianTape(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t seed() const { return rng_.seed(); }

  double increment(std::size_t particle, std::size_t step,
                   std::size_t component, std::size_t dim) const {
    return rng_.normal(streams::particle(streams::kNoise, particle),
                       step * dim + component);
  }
  void increments(std::size_t particle, std::size_t step,
                  std::span<double> out) const {
    rng_.normals(streams::particle(streams::kNoise, particle),
                 step * out.size(), out);
  }

  double init_normal(std::size_t particle, std::size_t component) const {
    return rng_.normal(streams::particle(streams::kInit, particle), component);
  }
  double init_uniform(std::size_t particle, std::size_t component) const {
    return rng_.uniform(streams::particle(streams::kInit, particle), component);
  }

 private:
  CounterRng rng_;
};

/// Law of the initial follower positions. Gaussian and uniform laws carry a
/// density (needed by the PDE solver); an empirical law is a pure sampler.
class InitialLaw {
 public:
  enum class Kind { gaussian, uniform_box, empirical };

  static InitialLaw gaussian(std::vector<double> mean, double stddev);
  static InitialLaw uniform_box(std::vector<double> lo, std::vector<double> hi);
  static InitialLaw empirical(EmpiricalMeasure atoms);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool has_density() const { return kind_ != Kind::empirical; }

  void sample(const BrownianTape& tape, std::size_t particle,
              std::span<double> out) const;

  /// d = 1 only; density of the law at x.
  double density1d(double x) const;
  /// Mean and variance per coordinate (closed form, or atom statistics).
  std::vector<double> mean() const;
  double variance1d() const;

  const std::vector<double>& gaussian_mean() const { return mean_; }
  double gaussian_stddev() const { return stddev_; }
  const std::vector<double>& box_lo() const { return lo_; }
  const std::vector<double>& box_hi() const { return hi_; }

 private:
  InitialLaw() = default;
  Kind kind_{};
  int dim_ = 0;
  std::vector<double> mean_, lo_, hi_;
  double stddev_ = 0.0;
  std::vector<double> atom_coords_, atom_cdf_;
};

/// Follower and herder positions at one time node.
struct SystemState {
  double t = 0.0;
  int d = 1;
  std::size_t N = 0, m = 0;
  std::vector<double> X;  // N * d, row-major
  std::vector<double> Y;  // m * d, row-major

  void validate() const;
  EmpiricalMeasure follower_measure() const;
};

/// Integration diverged; carries the step at which NaN/Inf first appeared.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(std::size_t step, std::string what)
      : std::runtime_error(std::move(what)), step_index(step) {}
  std::size_t step_index;
};

struct Trajectory {
  int d = 1;
  std::size_t N = 0, m = 0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> X;  // per node, N * d
  std::vector<std::vector<double>> Y;  // per node, m * d

  std::size_t nodes() const { return times.size(); }
  EmpiricalMeasure follower_measure(std::size_t node) const;
};

/// Draw the i.i.d. initial followers (tape-keyed per particle) and place the
/// herders at Y0 (m * d, row-major).
SystemState draw_initial_state(const InitialLaw& law,
                               const std::vector<double>& Y0, std::size_t N,
                               std::size_t m, int d, std::uint64_t seed);

/// One explicit Euler-Maruyama step of the N + m system. Drift and controls
/// are evaluated on the pre-step snapshot; `step_index` keys the Brownian
/// increments and is reported on blow-up.
SystemState step(const SystemState& state, double dt, const KernelSet& kernels,
                 const std::vector<ControlLaw>& controls,
                 const BrownianTape& tape, NoiseLevel noise,
                 std::size_t step_index = 0,
                 double dt_max = std::numeric_limits<double>::infinity());

/// Integrate on the uniform grid t_k = k dt up to T (T/dt must round to an
/// integer step count). dt_max <= 0 selects the default guard T/100.
Trajectory simulate(const SystemState& init, double T, double dt,
                    const KernelSet& kernels,
                    const std::vector<ControlLaw>& controls,
                    std::uint64_t seed, NoiseLevel noise, double dt_max = 0.0);

/// Number of steps for a (T, dt) grid; throws unless T/dt is integral within
/// 1e-9 relative.
std::size_t step_count(double T, double dt);

}  // namespace herdsim
