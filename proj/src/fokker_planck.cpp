#include "herdsim/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace herdsim {

GridDensity::GridDensity(double x_min, double x_max, std::vector<double> rho)
    : x_min_(x_min), x_max_(x_max), rho_(std::move(rho)) {
  if (!(x_min_ < x_max_)) throw std::invalid_argument("GridDensity: empty domain");
  if (rho_.size() < 2) throw std::invalid_argument("GridDensity: need >= 2 cells");
  for (double v : rho_) {
    if (!std::isfinite(v))
      throw std::invalid_argument("GridDensity: non-finite density");
    if (v < -1e-12)
      throw std::invalid_argument("GridDensity: negative density");
  }
  if (std::abs(mass() - 1.0) > 1e-8)
    throw std::invalid_argument("GridDensity: mass deviates from 1 beyond 1e-8");
}

double GridDensity::mass() const {
  double s = 0.0;
  for (double v : rho_) s += v;
  return s * dx();
}

double GridDensity::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < rho_.size(); ++i) s += rho_[i] * center(i);
  return s * dx();
}

double GridDensity::variance() const {
  const double mu = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < rho_.size(); ++i) {
    const double c = center(i) - mu;
    s += rho_[i] * c * c;
  }
  return s * dx();
}

EmpiricalMeasure GridDensity::to_measure() const {
  std::vector<double> coords(rho_.size()), weights(rho_.size());
  const double h = dx();
  for (std::size_t i = 0; i < rho_.size(); ++i) {
    coords[i] = center(i);
    weights[i] = std::max(rho_[i], 0.0) * h;
  }
  return EmpiricalMeasure(std::move(coords), 1, std::move(weights));
}

GridDensity GridDensity::from_law(const InitialLaw& law, const GridSpec& grid) {
  if (!law.has_density())
    throw std::invalid_argument(
        "GridDensity::from_law: initial law has no density");
  if (law.dim() != 1)
    throw std::invalid_argument("GridDensity::from_law: law is not 1-d");
  const double dx = (grid.x_max - grid.x_min) / double(grid.n_cells);
  std::vector<double> rho(grid.n_cells);
  double mass = 0.0;
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    rho[i] = law.density1d(grid.x_min + (double(i) + 0.5) * dx);
    mass += rho[i] * dx;
  }
  if (!(mass > 0.0))
    throw std::invalid_argument(
        "GridDensity::from_law: law has no mass inside the grid");
  for (double& v : rho) v /= mass;
  return GridDensity(grid.x_min, grid.x_max, std::move(rho));
}

EntropyReport entropy(const GridDensity& rho) {
  double s = 0.0;
  for (double v : rho.rho())
    if (v > 0.0) s += v * std::log(v);
  return EntropyReport{s * rho.dx()};
}

namespace {

// herder drift f(Y, rho, t): K2 quadrature on the grid + pairwise H2 +
// control on the grid measure
void herder_drift(const GridDensity& rho, const std::vector<double>& Y,
                  std::size_t m, double t, const KernelSet& kernels,
                  const std::vector<ControlLaw>& controls,
                  std::vector<double>& out) {
  const double h = rho.dx();
  const std::size_t n = rho.cells();
  out.assign(m, 0.0);
  if (!kernels.K2.is_zero()) {
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        acc += rho.rho()[j] * kernels.K2.eval1(Y[i] - rho.center(j));
      out[i] += acc * h;
    }
  }
  if (!kernels.H2.is_zero()) {
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        acc += kernels.H2.eval1(Y[j] - Y[i]);
      out[i] += acc / double(m);
    }
  }
  if (!controls.empty()) {
    const auto mu = rho.to_measure();
    std::vector<double> u(1);
    for (std::size_t i = 0; i < m; ++i) {
      const auto gv = controls[i].g.eval(mu);
      controls[i].eval_with_g(t, gv, u);
      out[i] += u[0];
    }
  }
}

// velocity of the continuity equation at the n+1 cell faces
void face_velocity(const GridDensity& rho, const std::vector<double>& Y,
                   std::size_t m, const KernelSet& kernels,
                   std::vector<double>& v) {
  const std::size_t n = rho.cells();
  const double h = rho.dx();
  v.assign(n + 1, 0.0);
  if (!kernels.H1.is_zero()) {
    for (std::size_t f = 0; f <= n; ++f) {
      const double xf = rho.x_min() + double(f) * h;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        acc += rho.rho()[j] * kernels.H1.eval1(rho.center(j) - xf);
      v[f] += acc * h;
    }
  }
  if (!kernels.K1.is_zero()) {
    for (std::size_t f = 0; f <= n; ++f) {
      const double xf = rho.x_min() + double(f) * h;
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        acc += kernels.K1.eval1(Y[i] - xf);
      v[f] += acc / double(m);
    }
  }
}

}  // namespace

FpSolution solve_fp(const GridDensity& rho0, const std::vector<double>& Y0,
                    std::size_t m, double T, const KernelSet& kernels,
                    const std::vector<ControlLaw>& controls, NoiseLevel noise,
                    FpConfig cfg) {
  if (kernels.dim() != 1)
    throw std::invalid_argument("solve_fp: kernels must be 1-d");
  if (!(noise.sigma > 0.0))
    throw std::invalid_argument("solve_fp: sigma must be > 0");
  if (m < 1 || Y0.size() != m)
    throw std::invalid_argument("solve_fp: Y0 size != m");
  if (!controls.empty() && controls.size() != m)
    throw std::invalid_argument("solve_fp: need one control per herder");
  if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0))
    throw std::invalid_argument("solve_fp: cfl_safety must be in (0,1]");
  if (cfg.n_snapshots < 2)
    throw std::invalid_argument("solve_fp: need at least 2 snapshots");
  if (!(T > 0.0)) throw std::invalid_argument("solve_fp: T must be > 0");

  const std::size_t n = rho0.cells();
  const double h = rho0.dx();
  const double sigma = noise.sigma;

  FpSolution sol;
  sol.times.reserve(cfg.n_snapshots);
  sol.densities.reserve(cfg.n_snapshots);
  sol.herders.reserve(cfg.n_snapshots);

  std::vector<double> rho = rho0.rho();
  std::vector<double> Y = Y0;
  double t = 0.0;
  std::size_t next_snap = 0;
  const double snap_dt = T / double(cfg.n_snapshots - 1);

  std::vector<double> v, flux(n + 1), f0, f1, Ystar(m), rho_new(n);
  auto record = [&](double time) {
    sol.times.push_back(time);
    sol.densities.emplace_back(rho0.x_min(), rho0.x_max(), rho);
    sol.herders.push_back(Y);
  };

  while (true) {
    const double snap_time = double(next_snap) * snap_dt;
    if (t >= snap_time - 1e-12 * std::max(1.0, T)) {
      record(snap_time);
      ++next_snap;
      if (next_snap == cfg.n_snapshots) break;
    }

    GridDensity cur(rho0.x_min(), rho0.x_max(), rho);
    face_velocity(cur, Y, m, kernels, v);
    double vmax = 0.0;
    for (double w : v) vmax = std::max(vmax, std::abs(w));
    if (vmax > cfg.v_max)
      throw std::runtime_error(
          "solve_fp: velocity " + std::to_string(vmax) +
          " exceeds the configured bound; domain too small for this run");

    double dt = cfg.cfl_safety * (h * h) / (2.0 * sigma);
    if (vmax > 0.0) dt = std::min(dt, cfg.cfl_safety * h / vmax);
    dt = std::min(dt, double(next_snap) * snap_dt - t);

    // herder predictor at t
    herder_drift(cur, Y, m, t, kernels, controls, f0);
    for (std::size_t i = 0; i < m; ++i) Ystar[i] = Y[i] + dt * f0[i];

    // density update: upwind advection + centered diffusion, no-flux walls
    flux[0] = flux[n] = 0.0;
    for (std::size_t f = 1; f < n; ++f) {
      const double adv =
          v[f] > 0.0 ? v[f] * rho[f - 1] : v[f] * rho[f];
      const double dif = -sigma * (rho[f] - rho[f - 1]) / h;
      flux[f] = adv + dif;
    }
    for (std::size_t i = 0; i < n; ++i)
      rho_new[i] = rho[i] - dt / h * (flux[i + 1] - flux[i]);
    for (double w : rho_new)
      if (w < -1e-12)
        throw std::runtime_error(
            "solve_fp: scheme produced negative density; CFL violated");
    rho.swap(rho_new);
    t += dt;

    // boundary-cell mass means the state is pressing on the walls
    if ((rho.front() + rho.back()) * h > 1e-6)
      throw std::runtime_error(
          "solve_fp: mass reached the domain boundary; domain too small");

    // herder corrector with the advanced density
    GridDensity nxt(rho0.x_min(), rho0.x_max(), rho);
    herder_drift(nxt, Ystar, m, t, kernels, controls, f1);
    for (std::size_t i = 0; i < m; ++i)
      Y[i] += 0.5 * dt * (f0[i] + f1[i]);

    ++sol.total_steps;
  }
  return sol;
}

EmpiricalMeasure FpSolution::measure_at(double t) const {
  if (times.empty()) throw std::invalid_argument("FpSolution: empty");
  if (t <= times.front()) return densities.front().to_measure();
  if (t >= times.back()) return densities.back().to_measure();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t q = static_cast<std::size_t>(it - times.begin()) - 1;
  const double theta = (t - times[q]) / (times[q + 1] - times[q]);
  const auto& a = densities[q];
  const auto& b = densities[q + 1];
  const double h = a.dx();
  std::vector<double> coords(a.cells()), weights(a.cells());
  for (std::size_t i = 0; i < a.cells(); ++i) {
    coords[i] = a.center(i);
    weights[i] =
        std::max((1.0 - theta) * a.rho()[i] + theta * b.rho()[i], 0.0) * h;
  }
  return EmpiricalMeasure(std::move(coords), 1, std::move(weights));
}

double equivalence_check(const FpSolution& fp, const LawFlow& mkv) {
  if (mkv.dim() != 1)
    throw std::invalid_argument("equivalence_check: flow must be 1-d");
  if (fp.times.empty())
    throw std::invalid_argument("equivalence_check: empty FP run");
  const double T_flow = mkv.time(mkv.nodes() - 1);
  if (T_flow > fp.times.back() + 1e-9 * std::max(1.0, T_flow))
    throw std::invalid_argument(
        "equivalence_check: FP horizon does not cover the ensemble grid");
  double worst = 0.0;
  for (std::size_t k = 0; k < mkv.nodes(); ++k) {
    const auto grid_measure = fp.measure_at(mkv.time(k));
    worst = std::max(worst, wasserstein1(grid_measure, mkv.snapshot(k)));
  }
  return worst;
}

}  // namespace herdsim
