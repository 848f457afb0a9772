#pragma once

#include <vector>

namespace randlr {

struct QuadNode {
  double u;
  double w;
};
using QuadRule = std::vector<QuadNode>;

/// Gauss-Legendre rule with `order` nodes on [lo, hi].
QuadRule gauss_legendre(int order, double lo, double hi);

/// Polynomial in epsilon with ascending coefficients c0 + c1*eps + ...
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}
  static Polynomial constant(double v) { return Polynomial({v}); }

  double operator()(double eps) const;
  double derivative(double eps) const;
  bool is_constant() const;
  const std::vector<double>& coefficients() const { return c_; }

 private:
  std::vector<double> c_;
};

}  // namespace randlr
