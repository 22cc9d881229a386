#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "herdsim/measures.hpp"

namespace herdsim {

/// Measure functional g: W_1(R^d) -> R^ell from a small dictionary of
/// M-bounded, L-Lipschitz families. The certified constants are spot-checked
/// by randomized W_1 perturbation tests at construction.
///
///   constant(c):        g(mu) = c,                    L = 0, M = |c|
///   tanh_statistic(c):  g_k(mu) = tanh( int phi_k dmu ),
///                       phi_k(x) = tanh(x_{k mod d} - c_k),
///                       L = 1, M = sqrt(ell)
class GFunctional {
 public:
  enum class Kind { constant, tanh_statistic };

  static GFunctional constant(std::vector<double> c, int dim);
  static GFunctional tanh_statistic(std::vector<double> centers, int dim);

  std::size_t ell() const { return params_.size(); }
  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  std::string kind_name() const;

  void eval(const EmpiricalMeasure& mu, std::span<double> out) const;
  std::vector<double> eval(const EmpiricalMeasure& mu) const;
  /// Same on a raw uniform-weight point buffer (count * dim, row-major);
  /// avoids materializing a measure per time node in the ensemble solvers.
  void eval_uniform(std::span<const double> coords, std::size_t count,
                    std::span<double> out) const;

  double lipschitz() const { return lipschitz_; }
  double bound() const { return bound_; }

 private:
  GFunctional(Kind kind, std::vector<double> params, int dim);
  void certify() const;

  Kind kind_;
  std::vector<double> params_;
  int dim_;
  double lipschitz_, bound_;
};

/// Piecewise-constant matrix path h: [0,T] -> U on uniform intervals, with
/// U = [-u_max, u_max]^{d x ell}. Values are stored interval-major, each
/// interval holding a row-major d x ell matrix.
class PiecewisePath {
 public:
  PiecewisePath(std::vector<double> values, std::size_t intervals, int dim,
                std::size_t ell, double t_end, double u_max);

  /// All-zero path.
  static PiecewisePath zero(std::size_t intervals, int dim, std::size_t ell,
                            double t_end, double u_max);
  /// Same constant matrix on every interval.
  static PiecewisePath constant(const std::vector<double>& matrix,
                                std::size_t intervals, int dim,
                                std::size_t ell, double t_end, double u_max);

  std::size_t intervals() const { return intervals_; }
  int dim() const { return dim_; }
  std::size_t ell() const { return ell_; }
  double t_end() const { return t_end_; }
  double u_max() const { return u_max_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t interval_of(double t) const;
  /// Row-major d x ell matrix in force at time t.
  std::span<const double> at(double t) const;

  /// Entrywise L1 norm of the matrix at time t.
  double l1_norm_at(double t) const;
  double frobenius_sq_at(double t) const;

 private:
  std::vector<double> values_;
  std::size_t intervals_;
  int dim_;
  std::size_t ell_;
  double t_end_, u_max_;
};

/// One herder's control u(t, mu) = h(t) g(mu), the separated-variables class.
struct ControlLaw {
  PiecewisePath h;
  GFunctional g;

  ControlLaw(PiecewisePath h_, GFunctional g_);

  /// u(t, mu) in R^d.
  std::vector<double> eval(double t, const EmpiricalMeasure& mu) const;
  /// Same with g(mu) already computed (one g evaluation serves all herders
  /// at a time node).
  void eval_with_g(double t, std::span<const double> g_values,
                   std::span<double> out) const;

  /// Zero control: h = 0, g constant.
  static ControlLaw zero(int dim, std::size_t ell, std::size_t intervals,
                         double t_end, double u_max);
};

}  // namespace herdsim
