#include "herdsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "herdsim/rng.hpp"

namespace herdsim {

KernelSpec::KernelSpec(KernelFamily family, double a, double s, int dim)
    : family_(family), a_(a), s_(s), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("KernelSpec: dim must be >= 1");
  if (!std::isfinite(a)) throw std::invalid_argument("KernelSpec: bad a");
  lipschitz_ = std::abs(a);
  certify();
}

KernelSpec KernelSpec::linear(double a, int dim) {
  return KernelSpec(KernelFamily::linear, a, 0.0, dim);
}

KernelSpec KernelSpec::saturating(double a, int dim) {
  return KernelSpec(KernelFamily::saturating, a, 0.0, dim);
}

KernelSpec KernelSpec::tanh_radial(double a, double s, int dim) {
  if (!(s > 0.0))
    throw std::invalid_argument("KernelSpec: tanh_radial needs s > 0");
  return KernelSpec(KernelFamily::tanh_radial, a, s, dim);
}

void KernelSpec::eval(std::span<const double> y, std::span<double> out) const {
  if (y.size() != static_cast<std::size_t>(dim_) || out.size() != y.size())
    throw std::invalid_argument("KernelSpec::eval: dimension mismatch");
  switch (family_) {
    case KernelFamily::linear:
      for (std::size_t k = 0; k < y.size(); ++k) out[k] = a_ * y[k];
      return;
    case KernelFamily::saturating: {
      double r2 = 0.0;
      for (double c : y) r2 += c * c;
      const double f = a_ / (1.0 + std::sqrt(r2));
      for (std::size_t k = 0; k < y.size(); ++k) out[k] = f * y[k];
      return;
    }
    case KernelFamily::tanh_radial: {
      double r2 = 0.0;
      for (double c : y) r2 += c * c;
      const double r = std::sqrt(r2);
      if (r == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
      }
      const double f = (a_ / s_) * std::tanh(s_ * r) / r;
      for (std::size_t k = 0; k < y.size(); ++k) out[k] = f * y[k];
      return;
    }
  }
  throw std::logic_error("KernelSpec: unknown family");
}

std::vector<double> KernelSpec::eval(std::span<const double> y) const {
  std::vector<double> out(y.size());
  eval(y, out);
  return out;
}

double KernelSpec::eval1(double y) const {
  if (dim_ != 1)
    throw std::invalid_argument("KernelSpec::eval1: kernel is not 1-d");
  switch (family_) {
    case KernelFamily::linear:
      return a_ * y;
    case KernelFamily::saturating:
      return a_ * y / (1.0 + std::abs(y));
    case KernelFamily::tanh_radial: {
      const double r = std::abs(y);
      return r > 0.0 ? (a_ / s_) * std::tanh(s_ * r) * (y / r) : 0.0;
    }
  }
  return 0.0;
}

namespace {

template <bool PointMinus>
void sum_loop(KernelFamily family, double a, double s,
              std::span<const double> atoms, std::size_t count,
              std::span<const double> x, std::span<double> out) {
  const std::size_t d = x.size();
  if (d == 1) {
    const double x0 = x[0];
    double acc = 0.0;
    switch (family) {
      case KernelFamily::linear:
        for (std::size_t i = 0; i < count; ++i) {
          const double y = PointMinus ? x0 - atoms[i] : atoms[i] - x0;
          acc += a * y;
        }
        break;
      case KernelFamily::saturating:
        for (std::size_t i = 0; i < count; ++i) {
          const double y = PointMinus ? x0 - atoms[i] : atoms[i] - x0;
          acc += a * y / (1.0 + std::abs(y));
        }
        break;
      case KernelFamily::tanh_radial:
        for (std::size_t i = 0; i < count; ++i) {
          const double y = PointMinus ? x0 - atoms[i] : atoms[i] - x0;
          const double r = std::abs(y);
          if (r > 0.0) acc += (a / s) * std::tanh(s * r) * (y / r);
        }
        break;
    }
    out[0] += acc;
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double* atom = atoms.data() + i * d;
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double y = PointMinus ? x[k] - atom[k] : atom[k] - x[k];
      r2 += y * y;
    }
    double f = 0.0;
    switch (family) {
      case KernelFamily::linear:
        f = a;
        break;
      case KernelFamily::saturating:
        f = a / (1.0 + std::sqrt(r2));
        break;
      case KernelFamily::tanh_radial: {
        const double r = std::sqrt(r2);
        f = r > 0.0 ? (a / s) * std::tanh(s * r) / r : 0.0;
        break;
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double y = PointMinus ? x[k] - atom[k] : atom[k] - x[k];
      out[k] += f * y;
    }
  }
}

}  // namespace

void KernelSpec::sum_atoms_minus(std::span<const double> atoms,
                                 std::size_t count, std::span<const double> x,
                                 std::span<double> out) const {
  if (a_ == 0.0) return;
  sum_loop<false>(family_, a_, s_, atoms, count, x, out);
}

void KernelSpec::sum_point_minus(std::span<const double> atoms,
                                 std::size_t count, std::span<const double> y,
                                 std::span<double> out) const {
  if (a_ == 0.0) return;
  sum_loop<true>(family_, a_, s_, atoms, count, y, out);
}

std::string KernelSpec::family_name() const {
  switch (family_) {
    case KernelFamily::linear: return "linear";
    case KernelFamily::saturating: return "saturating";
    case KernelFamily::tanh_radial: return "tanh_radial";
  }
  return "?";
}

void KernelSpec::certify() const {
  if (a_ == 0.0) return;
  CounterRng rng(0x6b65726e656c00ull);  // fixed certification seed
  const std::size_t n_pairs = 10000;
  std::vector<double> y1(dim_), y2(dim_), v1(dim_), v2(dim_);
  for (std::size_t t = 0; t < n_pairs; ++t) {
    // mix global pairs with pairs shrunk toward the origin, where the
    // difference quotients of the radial families peak
    const double scale = (t % 4 == 0) ? 1e-3 : 4.0;
    for (int k = 0; k < dim_; ++k) {
      y1[k] = scale * (2.0 * rng.uniform(0, t * 2 * dim_ + k) - 1.0);
      y2[k] = scale * (2.0 * rng.uniform(1, t * 2 * dim_ + k) - 1.0);
    }
    eval(y1, v1);
    eval(y2, v2);
    double num = 0.0, den = 0.0;
    for (int k = 0; k < dim_; ++k) {
      num += (v1[k] - v2[k]) * (v1[k] - v2[k]);
      den += (y1[k] - y2[k]) * (y1[k] - y2[k]);
    }
    if (den == 0.0) continue;
    if (std::sqrt(num) > lipschitz_ * std::sqrt(den) + 1e-9)
      throw std::logic_error("KernelSpec: Lipschitz certificate violated for " +
                             family_name());
  }
}

KernelSet::KernelSet(KernelSpec h1, KernelSpec h2, KernelSpec k1, KernelSpec k2)
    : H1(std::move(h1)), H2(std::move(h2)), K1(std::move(k1)), K2(std::move(k2)) {
  if (H1.dim() != H2.dim() || H1.dim() != K1.dim() || H1.dim() != K2.dim())
    throw std::invalid_argument("KernelSet: kernels disagree on dimension");
}

double KernelSet::L() const {
  return std::max({H1.lipschitz_constant(), H2.lipschitz_constant(),
                   K1.lipschitz_constant(), K2.lipschitz_constant()});
}

KernelSet KernelSet::none(int dim) {
  return KernelSet(KernelSpec::linear(0.0, dim), KernelSpec::linear(0.0, dim),
                   KernelSpec::linear(0.0, dim), KernelSpec::linear(0.0, dim));
}

}  // namespace herdsim
