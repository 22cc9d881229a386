#include "herdsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "herdsim/rng.hpp"

namespace herdsim {

GFunctional::GFunctional(Kind kind, std::vector<double> params, int dim)
    : kind_(kind), params_(std::move(params)), dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("GFunctional: dim must be >= 1");
  if (params_.empty())
    throw std::invalid_argument("GFunctional: ell must be >= 1");
  for (double v : params_)
    if (!std::isfinite(v))
      throw std::invalid_argument("GFunctional: non-finite parameter");
  switch (kind_) {
    case Kind::constant: {
      double n2 = 0.0;
      for (double v : params_) n2 += v * v;
      lipschitz_ = 0.0;
      bound_ = std::sqrt(n2);
      break;
    }
    case Kind::tanh_statistic:
      lipschitz_ = 1.0;
      bound_ = std::sqrt(static_cast<double>(params_.size()));
      break;
  }
  certify();
}

GFunctional GFunctional::constant(std::vector<double> c, int dim) {
  return GFunctional(Kind::constant, std::move(c), dim);
}

GFunctional GFunctional::tanh_statistic(std::vector<double> centers, int dim) {
  return GFunctional(Kind::tanh_statistic, std::move(centers), dim);
}

std::string GFunctional::kind_name() const {
  return kind_ == Kind::constant ? "constant" : "tanh_statistic";
}

void GFunctional::eval(const EmpiricalMeasure& mu, std::span<double> out) const {
  if (out.size() != params_.size())
    throw std::invalid_argument("GFunctional::eval: output size mismatch");
  if (mu.dim() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("GFunctional::eval: measure dimension mismatch");
  switch (kind_) {
    case Kind::constant:
      std::copy(params_.begin(), params_.end(), out.begin());
      return;
    case Kind::tanh_statistic: {
      for (std::size_t k = 0; k < params_.size(); ++k) {
        const std::size_t coord = k % static_cast<std::size_t>(dim_);
        double s = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
          s += mu.weight(i) * std::tanh(mu.point(i)[coord] - params_[k]);
        out[k] = std::tanh(s);
      }
      return;
    }
  }
}

void GFunctional::eval_uniform(std::span<const double> coords,
                               std::size_t count, std::span<double> out) const {
  if (out.size() != params_.size())
    throw std::invalid_argument("GFunctional::eval_uniform: output mismatch");
  const std::size_t d = static_cast<std::size_t>(dim_);
  if (coords.size() != count * d || count == 0)
    throw std::invalid_argument("GFunctional::eval_uniform: bad buffer");
  switch (kind_) {
    case Kind::constant:
      std::copy(params_.begin(), params_.end(), out.begin());
      return;
    case Kind::tanh_statistic: {
      const double w = 1.0 / double(count);
      for (std::size_t k = 0; k < params_.size(); ++k) {
        const std::size_t coord = k % d;
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i)
          s += std::tanh(coords[i * d + coord] - params_[k]);
        out[k] = std::tanh(w * s);
      }
      return;
    }
  }
}

std::vector<double> GFunctional::eval(const EmpiricalMeasure& mu) const {
  std::vector<double> out(params_.size());
  eval(mu, out);
  return out;
}

void GFunctional::certify() const {
  CounterRng rng(0x67636572740000ull);  // fixed certification seed
  const std::size_t n_pairs = 16, atoms = 8;
  const std::size_t d = static_cast<std::size_t>(dim_);
  std::vector<double> ga(ell()), gb(ell());
  for (std::size_t t = 0; t < n_pairs; ++t) {
    std::vector<double> ca(atoms * d), cb(atoms * d);
    for (std::size_t q = 0; q < ca.size(); ++q) {
      ca[q] = 4.0 * rng.uniform(2 * t, q) - 2.0;
      cb[q] = ca[q] + 0.5 * (rng.uniform(2 * t + 1, q) - 0.5);
    }
    const auto mu = EmpiricalMeasure::uniform(std::move(ca), d);
    const auto nu = EmpiricalMeasure::uniform(std::move(cb), d);
    eval(mu, ga);
    eval(nu, gb);
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t k = 0; k < ell(); ++k) {
      diff2 += (ga[k] - gb[k]) * (ga[k] - gb[k]);
      norm2 += ga[k] * ga[k];
    }
    if (std::sqrt(norm2) > bound_ + 1e-9)
      throw std::logic_error("GFunctional: bound certificate violated");
    if (std::sqrt(diff2) > lipschitz_ * wasserstein1(mu, nu) + 1e-9)
      throw std::logic_error("GFunctional: Lipschitz certificate violated");
  }
}

PiecewisePath::PiecewisePath(std::vector<double> values, std::size_t intervals,
                             int dim, std::size_t ell, double t_end,
                             double u_max)
    : values_(std::move(values)),
      intervals_(intervals),
      dim_(dim),
      ell_(ell),
      t_end_(t_end),
      u_max_(u_max) {
  if (intervals_ < 1 || dim_ < 1 || ell_ < 1)
    throw std::invalid_argument("PiecewisePath: bad shape");
  if (!(t_end_ > 0.0)) throw std::invalid_argument("PiecewisePath: t_end <= 0");
  if (!(u_max_ >= 0.0)) throw std::invalid_argument("PiecewisePath: u_max < 0");
  if (values_.size() != intervals_ * static_cast<std::size_t>(dim_) * ell_)
    throw std::invalid_argument("PiecewisePath: values size mismatch");
  for (double v : values_)
    if (!(std::abs(v) <= u_max_ + 1e-12))
      throw std::invalid_argument(
          "PiecewisePath: value outside the control box U");
}

PiecewisePath PiecewisePath::zero(std::size_t intervals, int dim,
                                  std::size_t ell, double t_end,
                                  double u_max) {
  return PiecewisePath(
      std::vector<double>(intervals * static_cast<std::size_t>(dim) * ell, 0.0),
      intervals, dim, ell, t_end, u_max);
}

PiecewisePath PiecewisePath::constant(const std::vector<double>& matrix,
                                      std::size_t intervals, int dim,
                                      std::size_t ell, double t_end,
                                      double u_max) {
  if (matrix.size() != static_cast<std::size_t>(dim) * ell)
    throw std::invalid_argument("PiecewisePath: matrix size mismatch");
  std::vector<double> values;
  values.reserve(intervals * matrix.size());
  for (std::size_t k = 0; k < intervals; ++k)
    values.insert(values.end(), matrix.begin(), matrix.end());
  return PiecewisePath(std::move(values), intervals, dim, ell, t_end, u_max);
}

std::size_t PiecewisePath::interval_of(double t) const {
  if (t <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(t / t_end_ * double(intervals_));
  return std::min(k, intervals_ - 1);
}

std::span<const double> PiecewisePath::at(double t) const {
  const std::size_t cell = static_cast<std::size_t>(dim_) * ell_;
  return {values_.data() + interval_of(t) * cell, cell};
}

double PiecewisePath::l1_norm_at(double t) const {
  double s = 0.0;
  for (double v : at(t)) s += std::abs(v);
  return s;
}

double PiecewisePath::frobenius_sq_at(double t) const {
  double s = 0.0;
  for (double v : at(t)) s += v * v;
  return s;
}

ControlLaw::ControlLaw(PiecewisePath h_, GFunctional g_)
    : h(std::move(h_)), g(std::move(g_)) {
  if (h.ell() != g.ell() || h.dim() != g.dim())
    throw std::invalid_argument("ControlLaw: h and g disagree on d or ell");
}

std::vector<double> ControlLaw::eval(double t,
                                     const EmpiricalMeasure& mu) const {
  const auto gv = g.eval(mu);
  std::vector<double> out(h.dim());
  eval_with_g(t, gv, out);
  return out;
}

void ControlLaw::eval_with_g(double t, std::span<const double> g_values,
                             std::span<double> out) const {
  const auto mat = h.at(t);
  const std::size_t ell = h.ell();
  for (int r = 0; r < h.dim(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < ell; ++c) s += mat[r * ell + c] * g_values[c];
    out[r] = s;
  }
}

ControlLaw ControlLaw::zero(int dim, std::size_t ell, std::size_t intervals,
                            double t_end, double u_max) {
  return ControlLaw(PiecewisePath::zero(intervals, dim, ell, t_end, u_max),
                    GFunctional::constant(std::vector<double>(ell, 0.0), dim));
}

}  // namespace herdsim
