#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "randlr/quadrature.hpp"

namespace randlr {

enum class DistKind { Fixed, DiracTranslate, DiracMixture, SmoothDensity, UniformToDirac };

std::string to_string(DistKind kind);

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

/// The derivative nu_eps of an order-one family eta_eps: d/deps <eta, phi> =
/// <nu, phi'> + sum(weight_atoms * phi). The weight part is only non-empty
/// for Dirac mixtures with eps-dependent weights.
struct DerivativeMeasure {
  double epsilon = 0.0;
  std::vector<Atom> atoms;
  /// Lebesgue density on [lo, hi]; empty when purely atomic.
  std::function<double(double)> density;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<Atom> weight_atoms;
};

using ScalarFn = std::function<double(double)>;

/// <nu, phi'> with Gauss-Legendre of the given order for density parts.
double pair_derivative(const DerivativeMeasure& nu, const ScalarFn& dphi, int quadrature_order = 24);
/// Weight part sum_i rho_i'(eps) phi(a_i + eps).
double pair_weight_part(const DerivativeMeasure& nu, const ScalarFn& phi);

/// A family eta_eps of probability measures on a parameter interval that is
/// differentiable in eps as a distribution of order one.
class ParameterDistribution {
 public:
  using DensityFn = std::function<double(double eps, double u)>;
  using SamplerFn = std::function<double(double eps, double uniform)>;

  /// eta_eps = delta_a for every eps (no dependence on eps).
  static ParameterDistribution fixed(double a);
  /// eta_eps = delta_{a+eps}; V is chosen so that a + eps stays in [lo, hi].
  static ParameterDistribution dirac_translate(double a, double lo = -kInf, double hi = kInf);
  /// eta_eps = sum_i rho_i(eps) delta_{a_i + eps}.
  static ParameterDistribution dirac_mixture(std::vector<double> atoms, std::vector<Polynomial> weights,
                                             double lo = -kInf, double hi = kInf);
  /// d eta_eps = rho_eps(u) du on [lo, hi] with analytic d/deps rho_eps.
  static ParameterDistribution smooth(double lo, double hi, DensityFn rho, DensityFn drho, double eps_min,
                                      double eps_max, SamplerFn sampler = {});
  /// The linear density 2 (u - alpha0/2 + eps) / ((alpha1 - alpha0)(alpha1 + 2 eps)) on
  /// [alpha0, alpha1], |eps| <= alpha0/4.
  static ParameterDistribution pm_smooth(double alpha0, double alpha1);
  /// Uniform on (a, a+eps) for eps > 0, delta_a at eps = 0.
  static ParameterDistribution uniform_to_dirac(double a, double hi = kInf);

  DistKind kind() const { return kind_; }
  /// Interval containing the support for every admissible eps.
  std::pair<double, double> support() const { return {lo_, hi_}; }
  std::pair<double, double> eps_range() const { return {eps_min_, eps_max_}; }
  bool admissible(double eps) const;
  /// Throws ConfigError when eps is outside V.
  void check_eps(double eps) const;
  /// True when eta does not depend on eps.
  bool frozen() const { return kind_ == DistKind::Fixed; }
  bool atomic_at(double eps) const;
  const std::vector<double>& atoms() const { return atoms_; }
  double anchor() const { return a_; }

  /// Discretization of eta_eps: exact for atoms, Gauss-Legendre otherwise.
  QuadRule eta_rule(double eps, int order) const;
  /// Discretization of nu_eps, to be paired against d/du of the integrand.
  QuadRule nu_rule(double eps, int order) const;
  /// Atoms of the mixture-weight derivative, paired against the integrand itself.
  QuadRule weight_rule(double eps) const;

  double integrate(const ScalarFn& phi, double eps, int quadrature_order) const;
  DerivativeMeasure derivative_measure(double eps) const;

  /// Inverse-CDF sample from eta_eps given a uniform variate in [0,1).
  double sample(double eps, double uniform) const;

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  DistKind kind_ = DistKind::Fixed;
  double a_ = 0.0;
  double lo_ = -kInf, hi_ = kInf;
  double eps_min_ = -kInf, eps_max_ = kInf;
  std::vector<double> atoms_;
  std::vector<Polynomial> weights_;
  DensityFn rho_, drho_;
  SamplerFn sampler_;
};

/// Leibniz term j of d/deps of the product eta^(1) x ... x eta^(n): coordinate
/// j carries nu_eps, the others eta_eps. Paired against d/du_j of the
/// integrand. Mixture-weight terms are left to the caller.
std::vector<QuadRule> product_derivative(const std::vector<ParameterDistribution>& dists, std::size_t j,
                                         double eps, int order);

/// Tensor-product sum of f over per-coordinate rules.
double pair_product(const std::vector<QuadRule>& rules, const std::function<double(const std::vector<double>&)>& f);

}  // namespace randlr
