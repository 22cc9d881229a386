#include "herdsim/particle_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "herdsim/parallel.hpp"

namespace herdsim {

InitialLaw InitialLaw::gaussian(std::vector<double> mean, double stddev) {
  if (mean.empty()) throw std::invalid_argument("InitialLaw: empty mean");
  if (!(stddev >= 0.0)) throw std::invalid_argument("InitialLaw: stddev < 0");
  InitialLaw law;
  law.kind_ = Kind::gaussian;
  law.dim_ = static_cast<int>(mean.size());
  law.mean_ = std::move(mean);
  law.stddev_ = stddev;
  return law;
}

InitialLaw InitialLaw::uniform_box(std::vector<double> lo,
                                   std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("InitialLaw: bad box");
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (!(lo[k] < hi[k]))
      throw std::invalid_argument("InitialLaw: box lo must be < hi");
  InitialLaw law;
  law.kind_ = Kind::uniform_box;
  law.dim_ = static_cast<int>(lo.size());
  law.lo_ = std::move(lo);
  law.hi_ = std::move(hi);
  return law;
}

InitialLaw InitialLaw::empirical(EmpiricalMeasure atoms) {
  InitialLaw law;
  law.kind_ = Kind::empirical;
  law.dim_ = static_cast<int>(atoms.dim());
  law.atom_coords_ = atoms.coords();
  law.atom_cdf_.resize(atoms.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    acc += atoms.weight(i);
    law.atom_cdf_[i] = acc;
  }
  law.atom_cdf_.back() = 1.0;
  return law;
}

void InitialLaw::sample(const BrownianTape& tape, std::size_t particle,
                        std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("InitialLaw::sample: dim mismatch");
  switch (kind_) {
    case Kind::gaussian:
      for (int k = 0; k < dim_; ++k)
        out[k] = mean_[k] + stddev_ * tape.init_normal(particle, k);
      return;
    case Kind::uniform_box:
      for (int k = 0; k < dim_; ++k)
        out[k] = lo_[k] + (hi_[k] - lo_[k]) * tape.init_uniform(particle, k);
      return;
    case Kind::empirical: {
      const double u = tape.init_uniform(particle, 0);
      const auto it = std::lower_bound(atom_cdf_.begin(), atom_cdf_.end(), u);
      const std::size_t i = static_cast<std::size_t>(it - atom_cdf_.begin());
      for (int k = 0; k < dim_; ++k) out[k] = atom_coords_[i * dim_ + k];
      return;
    }
  }
}

double InitialLaw::density1d(double x) const {
  if (dim_ != 1)
    throw std::invalid_argument("InitialLaw::density1d: law is not 1-d");
  switch (kind_) {
    case Kind::gaussian: {
      const double z = (x - mean_[0]) / stddev_;
      return std::exp(-0.5 * z * z) /
             (stddev_ * std::sqrt(2.0 * std::numbers::pi));
    }
    case Kind::uniform_box:
      return (x >= lo_[0] && x <= hi_[0]) ? 1.0 / (hi_[0] - lo_[0]) : 0.0;
    case Kind::empirical:
      throw std::invalid_argument(
          "InitialLaw::density1d: empirical law has no density");
  }
  return 0.0;
}

std::vector<double> InitialLaw::mean() const {
  switch (kind_) {
    case Kind::gaussian:
      return mean_;
    case Kind::uniform_box: {
      std::vector<double> c(lo_.size());
      for (std::size_t k = 0; k < lo_.size(); ++k) c[k] = 0.5 * (lo_[k] + hi_[k]);
      return c;
    }
    case Kind::empirical: {
      std::vector<double> c(dim_, 0.0);
      const std::size_t n = atom_cdf_.size();
      double prev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = atom_cdf_[i] - prev;
        prev = atom_cdf_[i];
        for (int k = 0; k < dim_; ++k) c[k] += w * atom_coords_[i * dim_ + k];
      }
      return c;
    }
  }
  return {};
}

double InitialLaw::variance1d() const {
  if (dim_ != 1)
    throw std::invalid_argument("InitialLaw::variance1d: law is not 1-d");
  switch (kind_) {
    case Kind::gaussian:
      return stddev_ * stddev_;
    case Kind::uniform_box: {
      const double w = hi_[0] - lo_[0];
      return w * w / 12.0;
    }
    case Kind::empirical: {
      const double mu = mean()[0];
      double v = 0.0, prev = 0.0;
      for (std::size_t i = 0; i < atom_cdf_.size(); ++i) {
        const double w = atom_cdf_[i] - prev;
        prev = atom_cdf_[i];
        v += w * (atom_coords_[i] - mu) * (atom_coords_[i] - mu);
      }
      return v;
    }
  }
  return 0.0;
}

void SystemState::validate() const {
  if (N < 1 || m < 1) throw std::invalid_argument("SystemState: N, m >= 1");
  if (X.size() != N * static_cast<std::size_t>(d) ||
      Y.size() != m * static_cast<std::size_t>(d))
    throw std::invalid_argument("SystemState: buffer sizes disagree with N,m,d");
  for (double v : X)
    if (!std::isfinite(v))
      throw std::invalid_argument("SystemState: non-finite follower position");
  for (double v : Y)
    if (!std::isfinite(v))
      throw std::invalid_argument("SystemState: non-finite herder position");
}

EmpiricalMeasure SystemState::follower_measure() const {
  return EmpiricalMeasure::uniform(X, static_cast<std::size_t>(d));
}

EmpiricalMeasure Trajectory::follower_measure(std::size_t node) const {
  return EmpiricalMeasure::uniform(X.at(node), static_cast<std::size_t>(d));
}

SystemState draw_initial_state(const InitialLaw& law,
                               const std::vector<double>& Y0, std::size_t N,
                               std::size_t m, int d, std::uint64_t seed) {
  if (law.dim() != d) throw std::invalid_argument("initial law dim != d");
  if (Y0.size() != m * static_cast<std::size_t>(d))
    throw std::invalid_argument("Y0 size != m*d");
  BrownianTape tape(seed);
  SystemState s;
  s.t = 0.0;
  s.d = d;
  s.N = N;
  s.m = m;
  s.X.resize(N * static_cast<std::size_t>(d));
  for (std::size_t n = 0; n < N; ++n)
    law.sample(tape, n, {s.X.data() + n * d, static_cast<std::size_t>(d)});
  s.Y = Y0;
  s.validate();
  return s;
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (T < 0.0) throw std::invalid_argument("T must be >= 0");
  const double raw = T / dt;
  const auto n = static_cast<std::size_t>(std::llround(raw));
  if (std::abs(raw - double(n)) > 1e-9 * std::max(1.0, raw))
    throw std::invalid_argument("T/dt is not an integer step count");
  return n;
}

namespace {

// drift of the full system evaluated on the (X, Y, mu_N) snapshot; the
// follower loop is parallel over particles, everything it reads is immutable
void system_drift(const SystemState& s, const KernelSet& kernels,
                  const std::vector<ControlLaw>& controls, double t,
                  std::vector<double>& dX, std::vector<double>& dY) {
  const std::size_t d = static_cast<std::size_t>(s.d);
  const double invN = 1.0 / double(s.N);
  const double invm = 1.0 / double(s.m);
  dX.assign(s.N * d, 0.0);
  dY.assign(s.m * d, 0.0);

  parallel_for(s.N, [&](std::size_t n) {
    std::span<const double> xn{s.X.data() + n * d, d};
    std::span<double> out{dX.data() + n * d, d};
    kernels.H1.sum_atoms_minus(s.X, s.N, xn, out);
    for (std::size_t k = 0; k < d; ++k) out[k] *= invN;
    std::vector<double> herd(d, 0.0);
    kernels.K1.sum_atoms_minus(s.Y, s.m, xn, herd);
    for (std::size_t k = 0; k < d; ++k) out[k] += invm * herd[k];
  });

  // herder drift; controls read the start-of-step empirical measure
  std::vector<std::vector<double>> g_values;
  if (!controls.empty()) {
    const auto mu = s.follower_measure();
    g_values.reserve(controls.size());
    for (const auto& law : controls) g_values.push_back(law.g.eval(mu));
  }
  std::vector<double> acc(d), u(d);
  for (std::size_t i = 0; i < s.m; ++i) {
    std::span<const double> yi{s.Y.data() + i * d, d};
    std::span<double> out{dY.data() + i * d, d};
    std::fill(acc.begin(), acc.end(), 0.0);
    kernels.K2.sum_point_minus(s.X, s.N, yi, acc);
    for (std::size_t k = 0; k < d; ++k) out[k] = invN * acc[k];
    std::fill(acc.begin(), acc.end(), 0.0);
    kernels.H2.sum_atoms_minus(s.Y, s.m, yi, acc);
    for (std::size_t k = 0; k < d; ++k) out[k] += invm * acc[k];
    if (!controls.empty()) {
      controls[i].eval_with_g(t, g_values[i], u);
      for (std::size_t k = 0; k < d; ++k) out[k] += u[k];
    }
  }
}

void check_finite(const SystemState& s, std::size_t step_index) {
  for (double v : s.X)
    if (!std::isfinite(v))
      throw BlowupError(step_index,
                        "integration blew up (follower) at step " +
                            std::to_string(step_index));
  for (double v : s.Y)
    if (!std::isfinite(v))
      throw BlowupError(step_index, "integration blew up (herder) at step " +
                                        std::to_string(step_index));
}

SystemState euler_step(const SystemState& s, double dt,
                       const KernelSet& kernels,
                       const std::vector<ControlLaw>& controls,
                       const BrownianTape& tape, NoiseLevel noise,
                       std::size_t step_index, std::vector<double>& dX,
                       std::vector<double>& dY) {
  const std::size_t d = static_cast<std::size_t>(s.d);
  system_drift(s, kernels, controls, s.t, dX, dY);
  SystemState next = s;
  next.t = s.t + dt;
  const double amp = std::sqrt(2.0 * noise.sigma * dt);
  if (amp > 0.0) {
    parallel_for(s.N, [&](std::size_t n) {
      for (std::size_t k = 0; k < d; ++k) {
        const double xi = tape.increment(n, step_index, k, d);
        next.X[n * d + k] = s.X[n * d + k] + dt * dX[n * d + k] + amp * xi;
      }
    });
  } else {
    for (std::size_t q = 0; q < s.X.size(); ++q)
      next.X[q] = s.X[q] + dt * dX[q];
  }
  for (std::size_t q = 0; q < s.Y.size(); ++q)
    next.Y[q] = s.Y[q] + dt * dY[q];
  check_finite(next, step_index);
  return next;
}

}  // namespace

SystemState step(const SystemState& state, double dt, const KernelSet& kernels,
                 const std::vector<ControlLaw>& controls,
                 const BrownianTape& tape, NoiseLevel noise,
                 std::size_t step_index, double dt_max) {
  state.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  if (dt > dt_max)
    throw std::invalid_argument("step: dt exceeds dt_max");
  if (!controls.empty() && controls.size() != state.m)
    throw std::invalid_argument("step: need one control law per herder");
  if (kernels.dim() != state.d)
    throw std::invalid_argument("step: kernel dimension != state dimension");
  std::vector<double> dX, dY;
  return euler_step(state, dt, kernels, controls, tape, noise, step_index, dX,
                    dY);
}

Trajectory simulate(const SystemState& init, double T, double dt,
                    const KernelSet& kernels,
                    const std::vector<ControlLaw>& controls,
                    std::uint64_t seed, NoiseLevel noise, double dt_max) {
  init.validate();
  if (!controls.empty() && controls.size() != init.m)
    throw std::invalid_argument("simulate: need one control law per herder");
  if (kernels.dim() != init.d)
    throw std::invalid_argument("simulate: kernel dimension != state dimension");
  const std::size_t n_steps = step_count(T, dt);
  if (dt_max <= 0.0) dt_max = T > 0.0 ? T / 100.0 : dt;
  if (n_steps > 0 && dt > dt_max * (1.0 + 1e-12))
    throw std::invalid_argument("simulate: dt exceeds dt_max (default T/100)");

  BrownianTape tape(seed);
  Trajectory traj;
  traj.d = init.d;
  traj.N = init.N;
  traj.m = init.m;
  traj.dt = dt;
  traj.times.reserve(n_steps + 1);
  traj.X.reserve(n_steps + 1);
  traj.Y.reserve(n_steps + 1);

  SystemState state = init;
  traj.times.push_back(state.t);
  traj.X.push_back(state.X);
  traj.Y.push_back(state.Y);
  std::vector<double> dX, dY;
  for (std::size_t k = 0; k < n_steps; ++k) {
    state = euler_step(state, dt, kernels, controls, tape, noise, k, dX, dY);
    state.t = init.t + double(k + 1) * dt;  // avoid drifting time sums
    traj.times.push_back(state.t);
    traj.X.push_back(state.X);
    traj.Y.push_back(state.Y);
  }
  return traj;
}

}  // namespace herdsim
