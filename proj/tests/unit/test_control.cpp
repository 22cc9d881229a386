#include <doctest.h>

#include <cmath>

#include "herdsim/control.hpp"
#include "herdsim/rng.hpp"

using namespace herdsim;

TEST_SUITE("control") {

TEST_CASE("g dictionary: certified bound and Lipschitz constant hold") {
  auto g = GFunctional::tanh_statistic({0.0, 0.5}, 1);
  CHECK(g.lipschitz() == 1.0);
  CHECK(g.bound() == doctest::Approx(std::sqrt(2.0)));

  CounterRng rng(3);
  std::vector<double> ga(2), gb(2);
  for (std::uint64_t t = 0; t < 30; ++t) {
    std::vector<double> ca(16), cb(16);
    for (std::size_t q = 0; q < 16; ++q) {
      ca[q] = 6.0 * rng.uniform(2 * t, q) - 3.0;
      cb[q] = ca[q] + (rng.uniform(2 * t + 1, q) - 0.5);
    }
    auto mu = EmpiricalMeasure::uniform(ca, 1);
    auto nu = EmpiricalMeasure::uniform(cb, 1);
    g.eval(mu, ga);
    g.eval(nu, gb);
    const double diff = std::hypot(ga[0] - gb[0], ga[1] - gb[1]);
    CHECK(diff <= g.lipschitz() * wasserstein1(mu, nu) + 1e-9);
    CHECK(std::hypot(ga[0], ga[1]) <= g.bound() + 1e-9);
  }
}

TEST_CASE("constant g ignores the measure") {
  auto g = GFunctional::constant({0.7, -0.2}, 1);
  CHECK(g.lipschitz() == 0.0);
  auto mu = EmpiricalMeasure::uniform({1.0, 2.0, 3.0}, 1);
  const auto v = g.eval(mu);
  CHECK(v[0] == 0.7);
  CHECK(v[1] == -0.2);
}

TEST_CASE("eval_uniform matches eval on uniform measures") {
  auto g = GFunctional::tanh_statistic({0.1, -0.4}, 2);
  CounterRng rng(12);
  std::vector<double> coords(10 * 2);
  for (std::size_t q = 0; q < coords.size(); ++q)
    coords[q] = 4.0 * rng.uniform(0, q) - 2.0;
  auto mu = EmpiricalMeasure::uniform(coords, 2);
  std::vector<double> a(2), b(2);
  g.eval(mu, a);
  g.eval_uniform(coords, 10, b);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
}

TEST_CASE("piecewise path: box enforcement and interval lookup") {
  CHECK_THROWS_AS(
      PiecewisePath({3.0, 0.0, 0.0, 0.0}, 2, 1, 2, 1.0, /*u_max=*/2.0),
      std::invalid_argument);
  PiecewisePath h({1.0, -2.0, 0.5, 2.0}, 2, 1, 2, 1.0, 2.0);
  CHECK(h.interval_of(0.0) == 0);
  CHECK(h.interval_of(0.49) == 0);
  CHECK(h.interval_of(0.51) == 1);
  CHECK(h.interval_of(1.0) == 1);  // clamped to the last interval
  CHECK(h.at(0.2)[0] == 1.0);
  CHECK(h.at(0.8)[1] == 2.0);
  CHECK(h.l1_norm_at(0.2) == doctest::Approx(3.0));
  CHECK(h.frobenius_sq_at(0.2) == doctest::Approx(5.0));
}

TEST_CASE("control law is the matrix-vector product h(t) g(mu)") {
  // d = 2, ell = 2: h rows [1 0; 0 2] on the single interval
  PiecewisePath h({1.0, 0.0, 0.0, 2.0}, 1, 2, 2, 1.0, 2.0);
  auto g = GFunctional::constant({0.3, -0.5}, 2);
  ControlLaw law(std::move(h), std::move(g));
  auto mu = EmpiricalMeasure::dirac({0.0, 0.0});
  const auto u = law.eval(0.5, mu);
  CHECK(u[0] == doctest::Approx(0.3));
  CHECK(u[1] == doctest::Approx(-1.0));
}

TEST_CASE("control law rejects mismatched shapes") {
  PiecewisePath h({0.0, 0.0}, 1, 1, 2, 1.0, 1.0);
  CHECK_THROWS_AS(ControlLaw(h, GFunctional::constant({0.0}, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ControlLaw(h, GFunctional::constant({0.0, 0.0}, 2)),
                  std::invalid_argument);
}

}  // TEST_SUITE
