#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "randlr/errors.hpp"
#include "randlr/function_space.hpp"

using namespace randlr;

TEST_CASE("chebyshev interpolation of the Gauss density") {
  const double c = 1.0 / std::log(2.0);
  auto b = Basis::chebyshev(40);
  const auto f = DensityFunction::sample(b, [c](double x) { return c / (1 + x); });
  CHECK(integrate(f) == doctest::Approx(1.0).epsilon(1e-10));
  for (double x : {0.0, 0.123, 0.5, 0.77, 1.0}) {
    CHECK(std::abs(eval(f, x) - c / (1 + x)) <= 1e-12);
    CHECK(std::abs(f.derivative_at(x) + c / ((1 + x) * (1 + x))) <= 1e-8);
  }
  const auto df = differentiate(f);
  CHECK(std::abs(eval(df, 0.3) + c / (1.3 * 1.3)) <= 1e-8);
  CHECK(sup_norm(f) == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("chebyshev on a subinterval") {
  auto b = Basis::chebyshev(20, 0.5, 1.0);
  const auto f = DensityFunction::sample(b, [](double x) { return std::exp(x); });
  CHECK(integrate(f) == doctest::Approx(std::exp(1.0) - std::exp(0.5)).epsilon(1e-12));
  CHECK(eval(f, 0.7) == doctest::Approx(std::exp(0.7)).epsilon(1e-12));
}

TEST_CASE("fourier basis on the circle") {
  for (int n : {32, 33}) {
    auto b = Basis::fourier(n);
    const auto f = DensityFunction::sample(b, [](double x) { return 1 + 0.3 * std::cos(2 * std::numbers::pi * x); });
    CHECK(integrate(f) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(eval(f, 0.37) == doctest::Approx(1 + 0.3 * std::cos(2 * std::numbers::pi * 0.37)).epsilon(1e-12));
    CHECK(f.derivative_at(0.21) ==
          doctest::Approx(-0.6 * std::numbers::pi * std::sin(2 * std::numbers::pi * 0.21)).epsilon(1e-10));
    // periodic evaluation
    CHECK(eval(f, 1.37) == doctest::Approx(eval(f, 0.37)).epsilon(1e-12));
  }
}

TEST_CASE("piecewise constant") {
  auto b = Basis::piecewise_constant(10);
  const auto f = DensityFunction::sample(b, [](double) { return 2.0; });
  CHECK(integrate(f) == doctest::Approx(2.0));
  CHECK(eval(f, 0.55) == doctest::Approx(2.0));
  CHECK_THROWS_AS(b->diff_matrix(), UnsupportedOperation);
}

TEST_CASE("arithmetic and norms") {
  auto b = Basis::chebyshev(16);
  const auto f = DensityFunction::sample(b, [](double x) { return x; });
  const auto g = DensityFunction::sample(b, [](double x) { return 1 - x; });
  CHECK(eval(f + g, 0.3) == doctest::Approx(1.0));
  CHECK(eval((f - g) * 2.0, 0.75) == doctest::Approx(1.0));
  CHECK(c1_norm(f) == doctest::Approx(2.0).epsilon(1e-10));
  // h-norm of x^{-gamma} is 1
  const auto grid = h_norm_grid();
  CHECK(grid.size() == 10000);
  CHECK(h_norm([](double x) { return std::pow(x, -0.6); }, 0.6, grid) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h_norm(f, 0.5) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("csv output") {
  std::ostringstream os;
  write_csv(os, {"x", "y"}, {{0.1, 0.2}, {1.0 / 3.0, 2.0}});
  const auto s = os.str();
  CHECK(s.find("x,y") == 0);
  CHECK(s.find("0.33333333333333331") != std::string::npos);
}
