#include "randlr/parameter_distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "randlr/errors.hpp"

namespace randlr {

std::string to_string(DistKind kind) {
  switch (kind) {
    case DistKind::Fixed: return "fixed";
    case DistKind::DiracTranslate: return "dirac";
    case DistKind::DiracMixture: return "mixture";
    case DistKind::SmoothDensity: return "smooth";
    case DistKind::UniformToDirac: return "uniform_to_dirac";
  }
  return "?";
}

double pair_derivative(const DerivativeMeasure& nu, const ScalarFn& dphi, int quadrature_order) {
  double acc = 0.0;
  for (const auto& at : nu.atoms) acc += at.weight * dphi(at.location);
  if (nu.density && nu.hi > nu.lo)
    for (const auto& q : gauss_legendre(quadrature_order, nu.lo, nu.hi)) acc += q.w * nu.density(q.u) * dphi(q.u);
  return acc;
}

double pair_weight_part(const DerivativeMeasure& nu, const ScalarFn& phi) {
  double acc = 0.0;
  for (const auto& at : nu.weight_atoms) acc += at.weight * phi(at.location);
  return acc;
}

ParameterDistribution ParameterDistribution::fixed(double a) {
  ParameterDistribution d;
  d.kind_ = DistKind::Fixed;
  d.a_ = a;
  d.lo_ = d.hi_ = a;
  d.atoms_ = {a};
  return d;
}

ParameterDistribution ParameterDistribution::dirac_translate(double a, double lo, double hi) {
  if (!(a >= lo && a <= hi)) throw ConfigError("dirac_translate: anchor outside its parameter interval");
  ParameterDistribution d;
  d.kind_ = DistKind::DiracTranslate;
  d.a_ = a;
  d.lo_ = lo;
  d.hi_ = hi;
  d.eps_min_ = lo - a;
  d.eps_max_ = hi - a;
  d.atoms_ = {a};
  return d;
}

ParameterDistribution ParameterDistribution::dirac_mixture(std::vector<double> atoms, std::vector<Polynomial> weights,
                                                           double lo, double hi) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw ConfigError("dirac_mixture: atoms and weights must be non-empty and of equal length");
  ParameterDistribution d;
  d.kind_ = DistKind::DiracMixture;
  d.lo_ = lo;
  d.hi_ = hi;
  d.eps_min_ = -kInf;
  d.eps_max_ = kInf;
  for (double a : atoms) {
    d.eps_min_ = std::max(d.eps_min_, lo - a);
    d.eps_max_ = std::min(d.eps_max_, hi - a);
  }
  // Weights must sum to one identically in eps.
  std::vector<double> sum;
  for (const auto& w : weights) {
    const auto& c = w.coefficients();
    if (sum.size() < c.size()) sum.resize(c.size(), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) sum[k] += c[k];
  }
  for (std::size_t k = 0; k < sum.size(); ++k)
    if (std::abs(sum[k] - (k == 0 ? 1.0 : 0.0)) > 1e-12)
      throw ConfigError("dirac_mixture: weights do not sum to 1 for all eps");
  d.a_ = atoms.front();
  d.atoms_ = std::move(atoms);
  d.weights_ = std::move(weights);
  return d;
}

ParameterDistribution ParameterDistribution::smooth(double lo, double hi, DensityFn rho, DensityFn drho,
                                                    double eps_min, double eps_max, SamplerFn sampler) {
  if (!(hi > lo)) throw ConfigError("smooth: empty support interval");
  if (!rho || !drho) throw ConfigError("smooth: density and its eps-derivative are both required");
  ParameterDistribution d;
  d.kind_ = DistKind::SmoothDensity;
  d.a_ = lo;
  d.lo_ = lo;
  d.hi_ = hi;
  d.eps_min_ = eps_min;
  d.eps_max_ = eps_max;
  d.rho_ = std::move(rho);
  d.drho_ = std::move(drho);
  d.sampler_ = std::move(sampler);
  return d;
}

ParameterDistribution ParameterDistribution::pm_smooth(double alpha0, double alpha1) {
  if (!(0.0 < alpha0 && alpha0 < alpha1 && alpha1 < 1.0))
    throw ConfigError("pm_smooth: need 0 < alpha0 < alpha1 < 1");
  const double span = alpha1 - alpha0;
  auto c = [=](double e) { return 2.0 / (span * (alpha1 + 2.0 * e)); };
  auto rho = [=](double e, double u) { return c(e) * (u - 0.5 * alpha0 + e); };
  auto drho = [=](double e, double u) {
    const double ce = c(e);
    return ce - 2.0 * ce / (alpha1 + 2.0 * e) * (u - 0.5 * alpha0 + e);
  };
  // CDF is c/2 ((u-b)^2 - (alpha0-b)^2) with b = alpha0/2 - eps.
  auto sampler = [=](double e, double U) {
    const double b = 0.5 * alpha0 - e;
    return b + std::sqrt((alpha0 - b) * (alpha0 - b) + 2.0 * U / c(e));
  };
  return smooth(alpha0, alpha1, rho, drho, -0.25 * alpha0, 0.25 * alpha0, sampler);
}

ParameterDistribution ParameterDistribution::uniform_to_dirac(double a, double hi) {
  ParameterDistribution d;
  d.kind_ = DistKind::UniformToDirac;
  d.a_ = a;
  d.lo_ = a;
  d.hi_ = hi;
  d.eps_min_ = 0.0;
  d.eps_max_ = hi - a;
  d.atoms_ = {a};
  return d;
}

bool ParameterDistribution::admissible(double eps) const {
  if (!(eps >= eps_min_ - 1e-15 && eps <= eps_max_ + 1e-15)) return false;
  if (kind_ == DistKind::DiracMixture)
    for (const auto& w : weights_)
      if (w(eps) < -1e-15) return false;
  return true;
}

void ParameterDistribution::check_eps(double eps) const {
  if (!admissible(eps)) {
    std::ostringstream os;
    os << to_string(kind_) << " distribution: eps = " << eps << " outside V = [" << eps_min_ << ", " << eps_max_
       << "]";
    throw ConfigError(os.str());
  }
}

bool ParameterDistribution::atomic_at(double eps) const {
  switch (kind_) {
    case DistKind::SmoothDensity: return false;
    case DistKind::UniformToDirac: return eps == 0.0;
    default: return true;
  }
}

QuadRule ParameterDistribution::eta_rule(double eps, int order) const {
  check_eps(eps);
  switch (kind_) {
    case DistKind::Fixed: return {{a_, 1.0}};
    case DistKind::DiracTranslate: return {{a_ + eps, 1.0}};
    case DistKind::DiracMixture: {
      QuadRule r;
      for (std::size_t i = 0; i < atoms_.size(); ++i) r.push_back({atoms_[i] + eps, weights_[i](eps)});
      return r;
    }
    case DistKind::SmoothDensity: {
      auto r = gauss_legendre(order, lo_, hi_);
      for (auto& q : r) q.w *= rho_(eps, q.u);
      return r;
    }
    case DistKind::UniformToDirac: {
      if (eps == 0.0) return {{a_, 1.0}};
      auto r = gauss_legendre(order, a_, a_ + eps);
      for (auto& q : r) q.w /= eps;
      return r;
    }
  }
  return {};
}

QuadRule ParameterDistribution::nu_rule(double eps, int order) const {
  check_eps(eps);
  switch (kind_) {
    case DistKind::Fixed: return {};
    case DistKind::DiracTranslate: return {{a_ + eps, 1.0}};
    case DistKind::DiracMixture: {
      QuadRule r;
      for (std::size_t i = 0; i < atoms_.size(); ++i) r.push_back({atoms_[i] + eps, weights_[i](eps)});
      return r;
    }
    case DistKind::SmoothDensity: {
      // nu has Lebesgue density s -> int_s^hi d/deps rho_eps(u) du.
      auto r = gauss_legendre(order, lo_, hi_);
      for (auto& q : r) {
        double tail = 0.0;
        for (const auto& p : gauss_legendre(order, q.u, hi_)) tail += p.w * drho_(eps, p.u);
        q.w *= tail;
      }
      return r;
    }
    case DistKind::UniformToDirac: {
      if (eps == 0.0) return {{a_, 0.5}};
      auto r = gauss_legendre(order, a_, a_ + eps);
      for (auto& q : r) q.w *= (q.u - a_) / (eps * eps);
      return r;
    }
  }
  return {};
}

QuadRule ParameterDistribution::weight_rule(double eps) const {
  check_eps(eps);
  QuadRule r;
  if (kind_ == DistKind::DiracMixture)
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const double dw = weights_[i].derivative(eps);
      if (dw != 0.0) r.push_back({atoms_[i] + eps, dw});
    }
  return r;
}

double ParameterDistribution::integrate(const ScalarFn& phi, double eps, int quadrature_order) const {
  auto apply = [&](int order) {
    double acc = 0.0;
    for (const auto& q : eta_rule(eps, order)) acc += q.w * phi(q.u);
    return acc;
  };
  const double v1 = apply(quadrature_order);
  if (atomic_at(eps)) return v1;
  const double v2 = apply(2 * quadrature_order);
  if (std::abs(v2 - v1) > 1e-10 * (1.0 + std::abs(v2))) {
    std::ostringstream os;
    os << "parameter quadrature not converged: order " << quadrature_order << " gives " << v1 << ", order "
       << 2 * quadrature_order << " gives " << v2;
    throw NumericalError(os.str(), v2 - v1);
  }
  return v2;
}

DerivativeMeasure ParameterDistribution::derivative_measure(double eps) const {
  check_eps(eps);
  DerivativeMeasure nu;
  nu.epsilon = eps;
  switch (kind_) {
    case DistKind::Fixed: break;
    case DistKind::DiracTranslate:
    case DistKind::DiracMixture:
      for (const auto& q : nu_rule(eps, 1)) nu.atoms.push_back({q.u, q.w});
      for (const auto& q : weight_rule(eps)) nu.weight_atoms.push_back({q.u, q.w});
      break;
    case DistKind::SmoothDensity: {
      auto drho = drho_;
      const double hi = hi_;
      nu.density = [drho, hi, eps](double s) {
        double tail = 0.0;
        for (const auto& p : gauss_legendre(24, s, hi)) tail += p.w * drho(eps, p.u);
        return tail;
      };
      nu.lo = lo_;
      nu.hi = hi_;
      break;
    }
    case DistKind::UniformToDirac:
      if (eps == 0.0) {
        nu.atoms.push_back({a_, 0.5});
      } else {
        const double a = a_;
        nu.density = [a, eps](double u) { return (u - a) / (eps * eps); };
        nu.lo = a_;
        nu.hi = a_ + eps;
      }
      break;
  }
  return nu;
}

double ParameterDistribution::sample(double eps, double uniform) const {
  switch (kind_) {
    case DistKind::Fixed: return a_;
    case DistKind::DiracTranslate: return a_ + eps;
    case DistKind::DiracMixture: {
      double total = 0.0;
      for (const auto& w : weights_) total += w(eps);
      double acc = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        acc += weights_[i](eps) / total;
        if (uniform < acc) return atoms_[i] + eps;
      }
      return atoms_.back() + eps;
    }
    case DistKind::SmoothDensity: {
      if (sampler_) return sampler_(eps, uniform);
      auto cdf = [&](double u) {
        double acc = 0.0;
        for (const auto& q : gauss_legendre(24, lo_, u)) acc += q.w * rho_(eps, q.u);
        return acc;
      };
      double lo = lo_, hi = hi_;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < uniform ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    case DistKind::UniformToDirac: return a_ + eps * uniform;
  }
  return a_;
}

std::vector<QuadRule> product_derivative(const std::vector<ParameterDistribution>& dists, std::size_t j, double eps,
                                         int order) {
  if (j >= dists.size()) throw ConfigError("product_derivative: index out of range");
  std::vector<QuadRule> rules;
  rules.reserve(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i)
    rules.push_back(i == j ? dists[i].nu_rule(eps, order) : dists[i].eta_rule(eps, order));
  return rules;
}

double pair_product(const std::vector<QuadRule>& rules, const std::function<double(const std::vector<double>&)>& f) {
  for (const auto& r : rules)
    if (r.empty()) return 0.0;
  std::vector<std::size_t> idx(rules.size(), 0);
  std::vector<double> u(rules.size());
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      u[i] = rules[i][idx[i]].u;
      w *= rules[i][idx[i]].w;
    }
    acc += w * f(u);
    std::size_t k = 0;
    for (; k < rules.size(); ++k) {
      if (++idx[k] < rules[k].size()) break;
      idx[k] = 0;
    }
    if (k == rules.size()) break;
  }
  return acc;
}

}  // namespace randlr
