#pragma once

#include <span>
#include <string>
#include <vector>

namespace herdsim {

enum class KernelFamily { linear, saturating, tanh_radial };

/// Globally Lipschitz interaction kernel R^d -> R^d with a certified
/// Lipschitz constant. All families are odd and vanish at the origin, so
/// self-interaction terms drop out of pairwise sums.
///
/// Families:
///   linear(a):       K(y) = a y
///   saturating(a):   K(y) = a y / (1 + |y|)
///   tanh_radial(a,s): K(y) = (a/s) tanh(s|y|) y/|y|,  K(0) = 0
///
/// The certificate |K(y1)-K(y2)| <= L |y1-y2| is spot-checked on 1e4 random
/// pairs at construction; a violation beyond 1e-9 throws.
class KernelSpec {
 public:
  static KernelSpec linear(double a, int dim);
  static KernelSpec saturating(double a, int dim);
  static KernelSpec tanh_radial(double a, double s, int dim);

  void eval(std::span<const double> y, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> y) const;
  /// Scalar evaluation for dim-1 kernels.
  double eval1(double y) const;

  /// Accumulate sum_i K(a_i - x) into out (atoms row-major, count * dim).
  /// The family dispatch is hoisted out of the loop; this is the hot path of
  /// every pairwise interaction sum.
  void sum_atoms_minus(std::span<const double> atoms, std::size_t count,
                       std::span<const double> x, std::span<double> out) const;
  /// Accumulate sum_i K(y - a_i) into out.
  void sum_point_minus(std::span<const double> atoms, std::size_t count,
                       std::span<const double> y, std::span<double> out) const;

  double lipschitz_constant() const { return lipschitz_; }
  int dim() const { return dim_; }
  KernelFamily family() const { return family_; }
  double param_a() const { return a_; }
  double param_s() const { return s_; }
  bool is_zero() const { return a_ == 0.0; }
  std::string family_name() const;

 private:
  KernelSpec(KernelFamily family, double a, double s, int dim);
  void certify() const;

  KernelFamily family_;
  double a_, s_;
  int dim_;
  double lipschitz_;
};

/// The four kernels of the herd-herder system, all sharing one dimension.
/// L is the common Lipschitz constant, the max of the four certificates.
struct KernelSet {
  KernelSpec H1, H2, K1, K2;

  KernelSet(KernelSpec h1, KernelSpec h2, KernelSpec k1, KernelSpec k2);

  int dim() const { return H1.dim(); }
  double L() const;

  /// All four kernels zero everywhere (a = 0).
  static KernelSet none(int dim);
};

}  // namespace herdsim
