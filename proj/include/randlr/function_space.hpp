#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace randlr {

enum class BasisKind { Chebyshev, Fourier, PiecewiseConstant };

std::string to_string(BasisKind kind);

/// Nodal basis on an interval (Chebyshev-Lobatto, Ulam bins) or on the
/// circle [0,1) (equispaced trigonometric). Coefficients are node values
/// (bin averages for Ulam), so every basis is interpolatory.
class Basis {
 public:
  static std::shared_ptr<const Basis> chebyshev(int n, double lo = 0.0, double hi = 1.0);
  static std::shared_ptr<const Basis> fourier(int n);
  static std::shared_ptr<const Basis> piecewise_constant(int k, double lo = 0.0, double hi = 1.0);

  BasisKind kind() const { return kind_; }
  int size() const { return n_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool periodic() const { return kind_ == BasisKind::Fourier; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  /// Quadrature weights: Clenshaw-Curtis, trapezoid, or bin widths.
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Spectral differentiation matrix on node values; throws for Ulam.
  const Eigen::MatrixXd& diff_matrix() const;

  /// Values of all cardinal functions at x.
  void interp_row(double x, std::span<double> out) const;
  /// Derivatives of all cardinal functions at x.
  void deriv_row(double x, std::span<double> out) const;

  Basis(BasisKind kind, int n, double lo, double hi);

 private:
  BasisKind kind_;
  int n_;
  double lo_, hi_;
  Eigen::VectorXd nodes_, weights_, bary_;
  Eigen::MatrixXd diff_;
};

using BasisPtr = std::shared_ptr<const Basis>;

/// A density or test function held as node values in a basis.
class DensityFunction {
 public:
  DensityFunction(BasisPtr basis, Eigen::VectorXd values);
  static DensityFunction sample(BasisPtr basis, const std::function<double(double)>& f);
  static DensityFunction zero(BasisPtr basis);

  const BasisPtr& basis() const { return basis_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  double operator()(double x) const;
  double derivative_at(double x) const;

  DensityFunction operator+(const DensityFunction& o) const;
  DensityFunction operator-(const DensityFunction& o) const;
  DensityFunction operator*(double s) const;

 private:
  BasisPtr basis_;
  Eigen::VectorXd values_;
};

double eval(const DensityFunction& f, double x);
double integrate(const DensityFunction& f);
DensityFunction differentiate(const DensityFunction& f);

/// sup over the node-refined grid of |f|, and of |f| + |f'| (C^1).
double sup_norm(const DensityFunction& f, int grid = 2001);
double c1_norm(const DensityFunction& f, int grid = 2001);

/// Grid of 10^4 points on (0,1]: half geometric from 1e-6, half uniform.
std::vector<double> h_norm_grid(int points = 10000, double smallest = 1e-6);
/// sup over the grid of |x^gamma f(x)|.
double h_norm(const std::function<double(double)>& f, double gamma, const std::vector<double>& grid);
double h_norm(const DensityFunction& f, double gamma);

/// CSV with a header row and 17 significant digits.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace randlr
