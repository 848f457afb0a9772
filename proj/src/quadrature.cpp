#include "randlr/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "randlr/errors.hpp"

namespace randlr {

QuadRule gauss_legendre(int order, double lo, double hi) {
  if (order < 1) throw ConfigError("gauss_legendre: order must be >= 1");
  QuadRule rule(static_cast<std::size_t>(order));
  const int n = order;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Tricomi initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule[static_cast<std::size_t>(i)] = {mid - half * x, half * w};
    rule[static_cast<std::size_t>(n - 1 - i)] = {mid + half * x, half * w};
  }
  return rule;
}

double Polynomial::operator()(double eps) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * eps + *it;
  return acc;
}

double Polynomial::derivative(double eps) const {
  double acc = 0.0;
  for (std::size_t k = c_.size(); k-- > 1;) acc = acc * eps + static_cast<double>(k) * c_[k];
  return acc;
}

bool Polynomial::is_constant() const {
  for (std::size_t k = 1; k < c_.size(); ++k)
    if (c_[k] != 0.0) return false;
  return true;
}

}  // namespace randlr
