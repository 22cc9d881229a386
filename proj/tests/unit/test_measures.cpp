#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "herdsim/kernels.hpp"
#include "herdsim/measures.hpp"
#include "herdsim/rng.hpp"

using namespace herdsim;

namespace {

// brute-force W_p over all permutation couplings of two equal-size
// uniform-weight measures; independent of every solver under test
double brute_force_wp(const std::vector<double>& xs,
                      const std::vector<double>& ys, double p) {
  std::vector<std::size_t> perm(ys.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      cost += std::pow(std::abs(xs[i] - ys[perm[i]]), p) / double(xs.size());
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best, 1.0 / p);
}

EmpiricalMeasure random_measure(const CounterRng& rng, std::uint64_t tag,
                                std::size_t n, std::size_t d,
                                bool uniform_weights) {
  std::vector<double> coords(n * d), weights(n);
  for (std::size_t q = 0; q < coords.size(); ++q)
    coords[q] = 6.0 * rng.uniform(2 * tag, q) - 3.0;
  for (std::size_t i = 0; i < n; ++i)
    weights[i] = uniform_weights ? 1.0 : 0.05 + rng.uniform(2 * tag + 1, i);
  return EmpiricalMeasure(std::move(coords), d, std::move(weights));
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("construction normalizes and validates") {
  EmpiricalMeasure mu({0.0, 1.0}, 1, {2.0, 6.0});
  CHECK(mu.weight(0) == doctest::Approx(0.25));
  CHECK(mu.weight(1) == doctest::Approx(0.75));
  CHECK_THROWS_AS(EmpiricalMeasure({0.0}, 1, {-0.5}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalMeasure({0.0, 1.0}, 2, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalMeasure({}, 1, {}), std::invalid_argument);
}

TEST_CASE("wasserstein1 examples") {
  auto mu = EmpiricalMeasure::uniform({0.5, -1.0, 2.0}, 1);
  CHECK(wasserstein1(mu, mu) == doctest::Approx(0.0));

  CHECK(wasserstein1(EmpiricalMeasure::dirac({0.0}),
                     EmpiricalMeasure::dirac({1.0})) == doctest::Approx(1.0));

  // {0,2} vs {1,3}: the only couplings of two uniform atoms pairs are the
  // identity and the swap; enumerate both
  const double expected = brute_force_wp({0.0, 2.0}, {1.0, 3.0}, 1.0);
  CHECK(expected == doctest::Approx(1.0));
  CHECK(wasserstein1(EmpiricalMeasure::uniform({0.0, 2.0}, 1),
                     EmpiricalMeasure::uniform({1.0, 3.0}, 1)) ==
        doctest::Approx(expected));
}

TEST_CASE("wasserstein_p examples") {
  auto mu = EmpiricalMeasure::uniform({0.3, 0.9}, 1);
  CHECK(wasserstein_p(mu, mu, MomentOrder(2.0)) == doctest::Approx(0.0));
  CHECK(wasserstein_p(EmpiricalMeasure::dirac({0.0}),
                      EmpiricalMeasure::dirac({2.0}), MomentOrder(2.0)) ==
        doctest::Approx(2.0));
  const double expected = brute_force_wp({-1.0, 1.0}, {0.0, 0.0}, 2.0);
  CHECK(expected == doctest::Approx(1.0));
  CHECK(wasserstein_p(EmpiricalMeasure::uniform({-1.0, 1.0}, 1),
                      EmpiricalMeasure::uniform({0.0, 0.0}, 1),
                      MomentOrder(2.0)) == doctest::Approx(expected));
}

TEST_CASE("errors: dimension mismatch and LP cap") {
  auto a = EmpiricalMeasure::dirac({0.0});
  auto b = EmpiricalMeasure::dirac({0.0, 0.0});
  CHECK_THROWS_AS(wasserstein1(a, b), std::invalid_argument);

  auto big = EmpiricalMeasure::uniform(std::vector<double>(10 * 2, 0.0), 2);
  CHECK_THROWS_WITH_AS(wasserstein1(big, big, /*lp_cap=*/4),
                       doctest::Contains("subsample"), std::invalid_argument);
  CHECK(wasserstein_p(big, big, MomentOrder(2.0), 16) == doctest::Approx(0.0));
}

TEST_CASE("moment examples and MomentOrder guard") {
  CHECK(moment(EmpiricalMeasure::dirac({0.0}), MomentOrder(3.0)) ==
        doctest::Approx(0.0));
  CHECK(moment(EmpiricalMeasure::dirac({2.0}), MomentOrder(2.0)) ==
        doctest::Approx(2.0));
  CHECK(moment(EmpiricalMeasure::uniform({-1.0, 1.0}, 1), MomentOrder(2.0)) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(MomentOrder(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MomentOrder(0.5), std::invalid_argument);
}

TEST_CASE("moment scales like |c| under x -> c x") {
  CounterRng rng(11);
  for (std::uint64_t t = 0; t < 20; ++t) {
    auto mu = random_measure(rng, t, 12, 2, false);
    const double c = 4.0 * rng.uniform(100 + t, 0) - 2.0;
    std::vector<double> scaled = mu.coords();
    for (double& v : scaled) v *= c;
    EmpiricalMeasure nu(scaled, 2, mu.weights());
    const MomentOrder p(1.0 + 3.0 * rng.uniform(100 + t, 1));
    CHECK(moment(nu, p) ==
          doctest::Approx(std::abs(c) * moment(mu, p)).epsilon(1e-9));
  }
}

TEST_CASE("convolve examples (convention: kernel of atom minus point)") {
  auto sat = KernelSpec::saturating(1.0, 1);
  CHECK(convolve(sat, EmpiricalMeasure::dirac({0.7}), {{0.7}})[0] ==
        doctest::Approx(0.0));

  // linear kernel: direct-sum oracle sum w_i (x_i - x)
  auto lin = KernelSpec::linear(1.0, 1);
  auto mu = EmpiricalMeasure::uniform({0.0, 2.0}, 1);
  const double oracle = 0.5 * (0.0 - 0.0) + 0.5 * (2.0 - 0.0);
  CHECK(convolve(lin, mu, {{0.0}})[0] == doctest::Approx(oracle));
  CHECK(oracle == doctest::Approx(1.0));

  CHECK(convolve(lin, EmpiricalMeasure::dirac({5.0}), {{2.0}})[0] ==
        doctest::Approx(3.0));

  auto lin2 = KernelSpec::linear(1.0, 2);
  CHECK_THROWS_AS(convolve(lin2, mu, {{0.0}}), std::invalid_argument);
}

TEST_CASE("convolve is Lipschitz in the evaluation point") {
  CounterRng rng(17);
  auto kernel = KernelSpec::saturating(1.7, 2);
  const double L = kernel.lipschitz_constant();
  auto mu = random_measure(rng, 3, 20, 2, false);
  for (std::uint64_t t = 0; t < 50; ++t) {
    std::vector<double> x{4.0 * rng.uniform(t, 0) - 2.0,
                          4.0 * rng.uniform(t, 1) - 2.0};
    std::vector<double> y{x[0] + 0.2 * (rng.uniform(t, 2) - 0.5),
                          x[1] + 0.2 * (rng.uniform(t, 3) - 0.5)};
    auto fx = convolve(kernel, mu, x);
    auto fy = convolve(kernel, mu, y);
    const double dv = std::hypot(fx[0] - fy[0], fx[1] - fy[1]);
    const double dx = std::hypot(x[0] - y[0], x[1] - y[1]);
    CHECK(dv <= L * dx + 1e-9);
  }
}

TEST_CASE("W1 is a metric: exact symmetry, triangle within 1e-9") {
  CounterRng rng(23);
  for (std::uint64_t t = 0; t < 25; ++t) {
    const std::size_t d = 1 + t % 2;
    auto a = random_measure(rng, 10 * t + 0, 5 + t % 7, d, false);
    auto b = random_measure(rng, 10 * t + 1, 4 + t % 5, d, false);
    auto c = random_measure(rng, 10 * t + 2, 6 + t % 4, d, false);
    const double ab = wasserstein1(a, b);
    const double ba = wasserstein1(b, a);
    CHECK(ab == ba);  // exact, not approximate
    CHECK(ab <= wasserstein1(a, c) + wasserstein1(c, b) + 1e-9);
    CHECK(wasserstein1(a, a) == doctest::Approx(0.0));
  }
}

TEST_CASE("d=1 sorted matching agrees with the LP to 1e-9 up to 64 atoms") {
  CounterRng rng(31);
  for (std::uint64_t t = 0; t < 40; ++t) {
    const std::size_t n = 2 + std::size_t(rng.uniform(500 + t, 0) * 62);
    const std::size_t k = 2 + std::size_t(rng.uniform(500 + t, 1) * 62);
    auto mu = random_measure(rng, 20 * t + 0, n, 1, false);
    auto nu = random_measure(rng, 20 * t + 1, k, 1, false);
    const double sorted = detail::wasserstein_sorted1d(mu, nu, 1.0);
    const double lp = detail::wasserstein_lp(mu, nu, 1.0);
    CHECK(std::abs(sorted - lp) <= 1e-9);
  }
  // equal-size uniform instances additionally hit the assignment route
  for (std::uint64_t t = 0; t < 20; ++t) {
    const std::size_t n = 2 + std::size_t(rng.uniform(900 + t, 0) * 62);
    auto mu = random_measure(rng, 40 * t + 0, n, 1, true);
    auto nu = random_measure(rng, 40 * t + 1, n, 1, true);
    const double sorted = detail::wasserstein_sorted1d(mu, nu, 1.0);
    CHECK(std::abs(sorted - detail::wasserstein_assignment(mu, nu, 1.0)) <=
          1e-9);
    CHECK(std::abs(sorted - detail::wasserstein_lp(mu, nu, 1.0)) <= 1e-9);
  }
}

TEST_CASE("W1 <= Wp for p > 1") {
  CounterRng rng(37);
  for (std::uint64_t t = 0; t < 20; ++t) {
    auto mu = random_measure(rng, 30 * t + 0, 10, 1, false);
    auto nu = random_measure(rng, 30 * t + 1, 8, 1, false);
    const MomentOrder p(1.0 + 3.0 * rng.uniform(800 + t, 0));
    CHECK(wasserstein1(mu, nu) <= wasserstein_p(mu, nu, p) + 1e-12);
  }
}

TEST_CASE("2d exact transport: translation moves mass by the shift") {
  std::vector<double> pts{0, 0, 1, 0, 0, 1, 2, 2};
  auto mu = EmpiricalMeasure::uniform(pts, 2);
  for (double& v : pts) v += 1.5;  // shift both coordinates
  auto nu = EmpiricalMeasure::uniform(pts, 2);
  CHECK(wasserstein1(mu, nu) ==
        doctest::Approx(std::hypot(1.5, 1.5)).epsilon(1e-12));
}

TEST_CASE("CSV round trip") {
  auto mu = EmpiricalMeasure({0.25, -1.5, 3.0, 0.125}, 2, {0.3, 0.7});
  std::stringstream ss;
  mu.write_csv(ss);
  auto back = EmpiricalMeasure::read_csv(ss);
  REQUIRE(back.size() == mu.size());
  REQUIRE(back.dim() == mu.dim());
  CHECK(back.coords() == mu.coords());
  CHECK(back.weights() == mu.weights());
}

}  // TEST_SUITE
