#include <doctest.h>

#include <cmath>
#include <numbers>

#include "randlr/errors.hpp"
#include "randlr/montecarlo.hpp"

using namespace randlr;

namespace {
constexpr double kPi = std::numbers::pi;

RandomSystem circle_mix(double base, double lambda) {
  return RandomSystem({Component{MapFamily::expanding_circle(lambda), Polynomial({base, 1.0}),
                                 ParameterDistribution::fixed(lambda)},
                       Component{MapFamily::expanding_circle(0.0), Polynomial({1.0 - base, -1.0}),
                                 ParameterDistribution::fixed(0.0)}});
}

RandomSystem gauss_renyi(double p) {
  return RandomSystem({Component{MapFamily::gauss(), Polynomial({1.0 - p, -1.0}), ParameterDistribution::fixed(0.0)},
                       Component{MapFamily::renyi(), Polynomial({p, 1.0}), ParameterDistribution::fixed(0.0)}});
}

SolverOptions fourier() {
  SolverOptions o;
  o.basis = BasisKind::Fourier;
  o.n = 65;
  o.cutoff = 1;
  o.quad_order = 16;
  return o;
}

const Observable kIdentity{"x", [](double x) { return x; }};
}  // namespace

TEST_CASE("counter rng") {
  const CounterRng a{1, 0}, b{1, 1}, c{2, 0};
  CHECK(a.bits(5, 0) == CounterRng{1, 0}.bits(5, 0));
  CHECK(a.bits(5, 0) != a.bits(6, 0));
  CHECK(a.bits(5, 0) != a.bits(5, 1));
  CHECK(a.bits(5, 0) != b.bits(5, 0));
  CHECK(a.bits(5, 0) != c.bits(5, 0));
  double m = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = a.uniform(i, 0);
    CHECK_FALSE((u < 0.0 || u >= 1.0));
    m += u / 100000.0;
  }
  CHECK(std::abs(m - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}

TEST_CASE("doubling map histogram is uniform") {
  OrbitSpec spec{RandomSystem::single(MapFamily::expanding_circle(0.0)), 0.0, 11, 0, 1000, 200000, {}, 10, 50};
  const auto s = sample_orbit(spec);
  const double n = 200000.0, p = 0.1;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (double h : s.histogram) CHECK(std::abs(h * p * n - n * p) <= 3 * sigma);
}

TEST_CASE("gauss map mean of x") {
  OrbitSpec spec{RandomSystem::single(MapFamily::gauss()), 0.0, 3, 0, 1000, 1000000, {kIdentity}, 20, 50};
  const auto s = sample_orbit(spec);
  const auto& e = s.observables.front();
  CHECK(std::abs(e.mean - (1.0 / std::log(2.0) - 1.0)) <= 3 * e.std_error);
  CHECK(e.std_error < 1e-3);

  const auto again = sample_orbit(spec);
  CHECK(again.observables.front().mean == e.mean);
  CHECK(again.histogram == s.histogram);
  spec.seed = 4;
  CHECK(sample_orbit(spec).observables.front().mean != e.mean);
}

TEST_CASE("replicas: threads do not change results") {
  OrbitSpec spec{gauss_renyi(0.5), 0.0, 9, 0, 1000, 20000, {kIdentity}, 20, 20};
  const auto one = sample_replicas(spec, 4, 1);
  const auto many = sample_replicas(spec, 4, 3);
  for (int k = 0; k < 4; ++k) {
    CHECK(one[static_cast<std::size_t>(k)].histogram == many[static_cast<std::size_t>(k)].histogram);
    CHECK(one[static_cast<std::size_t>(k)].replica == static_cast<std::uint64_t>(k));
  }
  CHECK(one[0].histogram != one[1].histogram);
  CHECK_THROWS_AS(sample_orbit(OrbitSpec{gauss_renyi(0.5), 0.0, 1, 0, 0, 0, {}, 10, 10}), ConfigError);
}

TEST_CASE("CI coverage over seeds") {
  const double target = 1.0 / std::log(2.0) - 1.0;
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    OrbitSpec spec{RandomSystem::single(MapFamily::gauss()), 0.0, seed, 0, 1000, 100000, {kIdentity}, 10, 50};
    const auto& e = sample_orbit(spec).observables.front();
    if (std::abs(e.mean - target) <= 1.96 * e.std_error) ++inside;
  }
  CHECK(inside >= 17);
}

TEST_CASE("histogram against the spectral density") {
  const auto sys = gauss_renyi(0.5);
  SolverOptions opts;
  opts.n = 40;
  const auto h = stationary_density(build_operator(sys, 0.0, opts.make_basis(), opts.cutoff, opts.quad_order));
  OrbitSpec spec{sys, 0.0, 21, 0, 1000, 200000, {}, 50, 50};
  const auto runs = sample_replicas(spec, 10);
  const auto b = bootstrap_l1(runs, [&](double x) { return h(x); });
  CHECK(b.pass);
  CHECK(b.distance < 0.05);
  CHECK(histogram_l1(std::vector<double>(4, 1.0), [](double) { return 1.0; }) <= 1e-14);
  CHECK(histogram_l1({2.0, 0.0}, [](double) { return 1.0; }) == doctest::Approx(1.0));
}

TEST_CASE("finite differences of ergodic averages") {
  SUBCASE("eps-independent system gives exactly zero") {
    const auto sys = RandomSystem::single(MapFamily::gauss());
    SolverOptions opts;
    opts.n = 40;
    const auto c = mc_response_check(sys, opts, kIdentity, 0.05, 1, 100000, 2);
    CHECK(c.fd_estimate == 0.0);
    CHECK(std::abs(c.operator_prediction) <= 1e-10);
  }
  SUBCASE("circle mixture, cos 2 pi x") {
    const Observable phi{"cos", [](double x) { return std::cos(2 * kPi * x); }};
    const auto c = mc_response_check(circle_mix(0.5, 0.05), fourier(), phi, 0.05, 5, 1000000, 4);
    CHECK(std::abs(c.z_score) <= 3.0);
    CHECK(std::abs(c.bias) < 1e-3);
  }
  SUBCASE("gauss-renyi, x") {
    SolverOptions opts;
    opts.n = 40;
    const auto c = mc_response_check(gauss_renyi(0.5), opts, kIdentity, 0.05, 5, 1000000, 4);
    CHECK(std::abs(c.z_score) <= 3.0);
  }
  CHECK_THROWS_AS(mc_response_check(gauss_renyi(0.0), SolverOptions{}, kIdentity, 0.05, 1), ConfigError);
}
