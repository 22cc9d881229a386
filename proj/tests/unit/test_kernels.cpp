#include <doctest.h>

#include <cmath>

#include "herdsim/kernels.hpp"
#include "herdsim/rng.hpp"

using namespace herdsim;

TEST_SUITE("kernels") {

TEST_CASE("eval examples") {
  CHECK(KernelSpec::linear(-1.0, 1).eval1(3.0) == doctest::Approx(-3.0));
  CHECK(KernelSpec::saturating(1.0, 1).eval1(0.0) == doctest::Approx(0.0));
  // formula oracle: 1 * 1 / (1 + |1|)
  CHECK(KernelSpec::saturating(1.0, 1).eval1(1.0) == doctest::Approx(0.5));
}

TEST_CASE("all families vanish at the origin") {
  const std::vector<double> zero2{0.0, 0.0};
  for (const auto& k :
       {KernelSpec::linear(2.0, 2), KernelSpec::saturating(-1.5, 2),
        KernelSpec::tanh_radial(0.8, 2.0, 2)}) {
    const auto v = k.eval(zero2);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
  }
}

TEST_CASE("kernels are odd") {
  CounterRng rng(5);
  for (const auto& k :
       {KernelSpec::linear(1.3, 1), KernelSpec::saturating(-2.0, 1),
        KernelSpec::tanh_radial(1.1, 3.0, 1)}) {
    for (std::uint64_t t = 0; t < 100; ++t) {
      const double y = 8.0 * rng.uniform(0, t) - 4.0;
      CHECK(k.eval1(-y) == doctest::Approx(-k.eval1(y)).epsilon(0));
    }
  }
}

TEST_CASE("lipschitz_constant examples") {
  CHECK(KernelSpec::linear(2.0, 1).lipschitz_constant() == 2.0);
  CHECK(KernelSpec::linear(0.0, 1).lipschitz_constant() == 0.0);
  CHECK(KernelSpec::saturating(3.0, 1).lipschitz_constant() == 3.0);
  CHECK(KernelSpec::tanh_radial(1.5, 2.0, 2).lipschitz_constant() == 1.5);
}

TEST_CASE("numerical sup of difference quotients reaches the certificate") {
  // sampled sup over 1e5 pairs must lower-bound the certified constant
  // within 1e-3; the quotient peaks at the origin so include shrunk pairs
  auto k = KernelSpec::saturating(3.0, 1);
  CounterRng rng(77);
  double sup = 0.0;
  for (std::uint64_t t = 0; t < 100000; ++t) {
    const double scale = (t % 2 == 0) ? 1e-4 : 2.0;
    const double y1 = scale * (2.0 * rng.uniform(0, t) - 1.0);
    const double y2 = scale * (2.0 * rng.uniform(1, t) - 1.0);
    if (y1 == y2) continue;
    sup = std::max(sup, std::abs(k.eval1(y1) - k.eval1(y2)) / std::abs(y1 - y2));
  }
  CHECK(sup <= k.lipschitz_constant() + 1e-9);
  CHECK(sup >= k.lipschitz_constant() - 1e-3);
}

TEST_CASE("sampled quotient never exceeds the certificate") {
  CounterRng rng(99);
  for (const auto& k :
       {KernelSpec::linear(-1.7, 2), KernelSpec::saturating(2.5, 2),
        KernelSpec::tanh_radial(1.2, 0.7, 2)}) {
    const double L = k.lipschitz_constant();
    for (std::uint64_t t = 0; t < 2000; ++t) {
      std::vector<double> y1{6 * rng.uniform(0, 2 * t) - 3,
                             6 * rng.uniform(0, 2 * t + 1) - 3};
      std::vector<double> y2{6 * rng.uniform(1, 2 * t) - 3,
                             6 * rng.uniform(1, 2 * t + 1) - 3};
      const auto v1 = k.eval(y1);
      const auto v2 = k.eval(y2);
      const double num = std::hypot(v1[0] - v2[0], v1[1] - v2[1]);
      const double den = std::hypot(y1[0] - y2[0], y1[1] - y2[1]);
      if (den > 0.0) CHECK(num <= L * den + 1e-9);
    }
  }
}

TEST_CASE("pairwise sums match eval") {
  auto k = KernelSpec::saturating(1.1, 2);
  std::vector<double> atoms{0.5, -1.0, 2.0, 0.25, -0.75, 1.5};
  std::vector<double> x{0.1, 0.2};
  std::vector<double> acc(2, 0.0);
  k.sum_atoms_minus(atoms, 3, x, acc);
  std::vector<double> expect(2, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = k.eval({{atoms[2 * i] - x[0], atoms[2 * i + 1] - x[1]}});
    expect[0] += v[0];
    expect[1] += v[1];
  }
  CHECK(acc[0] == doctest::Approx(expect[0]).epsilon(1e-14));
  CHECK(acc[1] == doctest::Approx(expect[1]).epsilon(1e-14));

  std::fill(acc.begin(), acc.end(), 0.0);
  k.sum_point_minus(atoms, 3, x, acc);
  std::fill(expect.begin(), expect.end(), 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = k.eval({{x[0] - atoms[2 * i], x[1] - atoms[2 * i + 1]}});
    expect[0] += v[0];
    expect[1] += v[1];
  }
  CHECK(acc[0] == doctest::Approx(expect[0]).epsilon(1e-14));
  CHECK(acc[1] == doctest::Approx(expect[1]).epsilon(1e-14));
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(KernelSpec::tanh_radial(1.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::linear(1.0, 0), std::invalid_argument);
  auto k = KernelSpec::linear(1.0, 2);
  CHECK_THROWS_AS(k.eval({{1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(k.eval1(1.0), std::invalid_argument);
  CHECK_THROWS_AS(
      KernelSet(KernelSpec::linear(1.0, 1), KernelSpec::linear(1.0, 2),
                KernelSpec::linear(1.0, 1), KernelSpec::linear(1.0, 1)),
      std::invalid_argument);
}

TEST_CASE("KernelSet common constant is the max of the four") {
  KernelSet set(KernelSpec::linear(1.0, 1), KernelSpec::saturating(0.5, 1),
                KernelSpec::saturating(2.5, 1), KernelSpec::tanh_radial(0.3, 1.0, 1));
  CHECK(set.L() == doctest::Approx(2.5));
}

}  // TEST_SUITE
