#include <doctest.h>

#include <cmath>
#include <numbers>

#include "randlr/errors.hpp"
#include "randlr/map_families.hpp"

using namespace randlr;

TEST_CASE("forward_map examples") {
  CHECK(forward_map(MapFamily::gauss(), 0.4) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(forward_map(MapFamily::lsv(0.3), 0.75) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(forward_map(MapFamily::expanding_circle(0.0), 0.3) == doctest::Approx(0.6).epsilon(1e-15));
  // LSV left branch is closed at 1/2.
  CHECK(forward_map(MapFamily::lsv(0.5), 0.5) == doctest::Approx(1.0));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(MapFamily::expanding_circle(0.2), ConfigError);
  CHECK_THROWS_AS(MapFamily::lsv(1.0), ConfigError);
  CHECK_THROWS_AS(MapFamily::lsv(0.0), ConfigError);
  CHECK_NOTHROW(MapFamily::expanding_circle(-0.15));
}

TEST_CASE("branches and tail bounds") {
  const auto g = branches(MapFamily::gauss(), 3);
  REQUIRE(g.branches.size() == 3);
  CHECK(g.tail_bound <= 1.0 / 3.0 + 1e-15);
  for (int n = 1; n <= 3; ++n) CHECK(g.branches[n - 1](0.3) == doctest::Approx(1.0 / (n + 0.3)));

  const auto c = branches(MapFamily::expanding_circle(0.05), 1000);
  CHECK(c.branches.size() == 2);
  CHECK(c.tail_bound == 0.0);

  const auto r = branches(MapFamily::renyi(), 2);
  REQUIRE(r.branches.size() == 2);
  CHECK(r.branches[0](0.25) == doctest::Approx(1.0 - 1.0 / 1.25));
  CHECK(r.branches[1](0.25) == doctest::Approx(1.0 - 1.0 / 2.25));
}

TEST_CASE("inverse_branch_derivative examples") {
  const auto g = branches(MapFamily::gauss(), 2);
  CHECK(inverse_branch_derivative(g.branches[0], 0.0, 1) == doctest::Approx(-1.0));
  CHECK(inverse_branch_derivative(g.branches[1], 1.0, 0) == doctest::Approx(1.0 / 3.0));
  const auto d = branches(MapFamily::expanding_circle(0.0), 1);
  CHECK(inverse_branch_derivative(d.branches[0], 0.5, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(inverse_branch_derivative(d.branches[0], 0.5, 4), ConfigError);
}

namespace {
std::vector<MapFamily> all_families() {
  return {MapFamily::expanding_circle(0.0), MapFamily::expanding_circle(0.1), MapFamily::expanding_circle(-0.12),
          MapFamily::gauss(), MapFamily::renyi(), MapFamily::lsv(0.25), MapFamily::lsv(0.7)};
}
}  // namespace

TEST_CASE("round trip T(g(x)) = x") {
  for (const auto& fam : all_families()) {
    for (const auto& b : fam.branches(20).branches) {
      for (int i = 0; i < 100; ++i) {
        const double x = (i + 0.5) / 100.0;
        double y = fam.forward(b(x));
        if (fam.domain() == Domain::Circle) {
          double d = y - x;
          d -= std::round(d);
          CHECK(std::abs(d) <= 1e-10);
        } else {
          CHECK(std::abs(y - x) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("branch ranges partition the interval up to the tail bound") {
  for (const auto& fam : all_families()) {
    const auto set = fam.branches(50);
    double total = 0.0;
    for (const auto& b : set.branches) {
      const auto [lo, hi] = b.range();
      total += hi - lo;
      // g maps [0,1] onto its range.
      const double a = b(0.0), c = b(1.0);
      CHECK(std::min(a, c) == doctest::Approx(lo).epsilon(1e-12));
      CHECK(std::max(a, c) == doctest::Approx(hi).epsilon(1e-12));
    }
    CHECK(total <= 1.0 + 1e-12);
    CHECK(total >= 1.0 - set.tail_bound - 1e-12);
  }
}

TEST_CASE("derivative consistency with central differences") {
  const double h = 1e-4;
  for (const auto& fam : all_families()) {
    for (const auto& b : fam.branches(5).branches) {
      for (double x : {0.1, 0.33, 0.6, 0.9}) {
        for (int order = 1; order <= 3; ++order) {
          const double fd = (b.derivative(x + h, order - 1) - b.derivative(x - h, order - 1)) / (2 * h);
          const double ex = b.derivative(x, order);
          CHECK(std::abs(fd - ex) <= 1e-6 * std::max(1.0, std::abs(ex)));
        }
      }
    }
  }
}

TEST_CASE("parameter derivatives agree with differencing in the parameter") {
  const double h = 1e-6;
  for (auto [fam, p] : {std::pair{MapFamily::expanding_circle(0.05), 0.05}, std::pair{MapFamily::lsv(0.3), 0.3}}) {
    for (int idx : {0, 1}) {
      Branch b(fam.kind(), idx, p), bp(fam.kind(), idx, p + h), bm(fam.kind(), idx, p - h);
      for (double x : {0.05, 0.4, 0.8}) {
        const auto pj = b.param_jet(x);
        CHECK(pj.dg == doctest::Approx((bp(x) - bm(x)) / (2 * h)).epsilon(1e-6));
        CHECK(pj.dg1 == doctest::Approx((bp.jet(x).d1 - bm.jet(x).d1) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("sign of g' is constant per branch") {
  for (const auto& fam : all_families()) {
    for (const auto& b : fam.branches(10).branches) {
      const double s0 = std::copysign(1.0, b.jet(0.5).d1);
      for (int i = 0; i <= 1000; ++i) CHECK(std::copysign(1.0, b.jet(i / 1000.0).d1) == s0);
    }
  }
}

TEST_CASE("check_expansion") {
  const auto r = check_expansion(MapFamily::expanding_circle(0.05), 201);
  CHECK(r.satisfied);
  CHECK(r.beta == doctest::Approx(1.0 / (2.0 - 2.0 * std::numbers::pi * 0.05)).epsilon(1e-9));
  CHECK(check_expansion(MapFamily::expanding_circle(0.0), 11).beta == doctest::Approx(0.5));
  const auto lsv = check_expansion(MapFamily::lsv(0.5), 101);
  CHECK_FALSE(lsv.satisfied);
  CHECK(lsv.beta == doctest::Approx(1.0));
}

TEST_CASE("check_distortion") {
  CHECK(check_distortion(MapFamily::expanding_circle(0.0), 50) == doctest::Approx(0.0));
  const double dg = check_distortion(MapFamily::gauss(), 60, 100);
  const double dr = check_distortion(MapFamily::renyi(), 60, 100);
  CHECK(dg > 0.0);
  CHECK(std::isfinite(dg));
  CHECK(dg == doctest::Approx(dr).epsilon(1e-12));
  // Brute force for the n = 1 Gauss branch: |(1+y)^2/(1+x)^2 - 1| / |x-y| is maximal at x = 0, y = 1/59 ... ;
  // the grid maximum must dominate the n = 1 value on the same grid endpoints.
  CHECK(dg >= std::abs(4.0 / 1.0 - 1.0) / 1.0 - 1e-12);
}
