#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace herdsim {

class KernelSpec;

/// Finitely supported probability measure on R^d: a weighted point cloud.
/// Weights are normalized to sum to one at construction; negative weights
/// are rejected rather than clipped.
class EmpiricalMeasure {
 public:
  /// `coords` is row-major, size() * dim doubles.
  EmpiricalMeasure(std::vector<double> coords, std::size_t dim,
                   std::vector<double> weights);

  /// Uniform weights 1/n.
  static EmpiricalMeasure uniform(std::vector<double> coords, std::size_t dim);

  /// Single atom at x with mass 1.
  static EmpiricalMeasure dirac(std::vector<double> x);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }

  bool uniform_weights(double tol = 1e-14) const;

  /// One row per atom: weight, x_1, ..., x_d.
  void write_csv(std::ostream& os) const;
  static EmpiricalMeasure read_csv(std::istream& is);

 private:
  std::vector<double> coords_;
  std::size_t dim_;
  std::vector<double> weights_;
};

/// Moment order p > 1 (p = 1 is served by wasserstein1 directly).
struct MomentOrder {
  double p;
  explicit MomentOrder(double p_);
};

/// Exact 1-Wasserstein distance. d = 1 uses the sorted quantile matching;
/// d >= 2 uses minimum-cost assignment (equal-size uniform supports) or the
/// transportation-simplex LP (general weights). Supports above `lp_cap`
/// atoms per side in d >= 2 are refused.
double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                    std::size_t lp_cap = 4096);

/// Exact p-Wasserstein distance, cost |x-y|^p, p-th root of the optimum.
double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     MomentOrder p, std::size_t lp_cap = 4096);

/// p-th moment about the origin: (sum_i w_i |x_i|^p)^(1/p).
double moment(const EmpiricalMeasure& mu, MomentOrder p);

/// Kernel-measure convolution, convention fixed by the interacting-particle
/// sums: (K * mu)(x) = sum_i w_i K(x_i - x), kernel argument atom minus
/// evaluation point.
std::vector<double> convolve(const KernelSpec& kernel,
                             const EmpiricalMeasure& mu,
                             std::span<const double> x);

namespace detail {
/// The three exact transport routes, exposed individually so tests can
/// cross-check them against each other on the same instance.
double wasserstein_sorted1d(const EmpiricalMeasure& mu,
                            const EmpiricalMeasure& nu, double p);
double wasserstein_assignment(const EmpiricalMeasure& mu,
                              const EmpiricalMeasure& nu, double p);
double wasserstein_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                      double p);
}  // namespace detail

}  // namespace herdsim
