#include "randlr/linear_response.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "randlr/errors.hpp"

namespace randlr {

BasisPtr SolverOptions::make_basis() const {
  switch (basis) {
    case BasisKind::Chebyshev: return Basis::chebyshev(n);
    case BasisKind::Fourier: return Basis::fourier(n);
    case BasisKind::PiecewiseConstant: return Basis::piecewise_constant(n);
  }
  return nullptr;
}

namespace {

std::vector<double> node_vector(const Basis& b) { return {b.nodes().data(), b.nodes().data() + b.size()}; }

// sum over branches of d/du [h(g_u(x)) |g_u'(x)|]
double branch_param_derivative(const BranchSet& set, const DensityFunction& h, const DensityFunction& dh, double x) {
  double acc = 0.0;
  for (const auto& b : set.branches) {
    const auto j = b.jet(x);
    const auto p = b.param_jet(x);
    const double sg = j.d1 < 0.0 ? -1.0 : 1.0;
    acc += dh(j.g) * p.dg * std::abs(j.d1) + h(j.g) * sg * p.dg1;
  }
  return acc;
}

double branch_sum(const BranchSet& set, const DensityFunction& h, double x) {
  double acc = 0.0;
  for (const auto& b : set.branches) {
    const auto j = b.jet(x);
    acc += h(j.g) * std::abs(j.d1);
  }
  return acc;
}

double observable_integral(const Observable& o, const DensityFunction& f) {
  const auto& b = *f.basis();
  double s = 0.0;
  for (int j = 0; j < b.size(); ++j) s += b.weights()[j] * o.phi(b.nodes()[j]) * f.values()[j];
  return s;
}

void fill_response(ResponseReport& r, const DiscretizedOperator& op, const std::vector<Observable>& observables) {
  r.q_mean = integrate(r.q);
  const Resolvent res(op, r.h0);
  const auto sol = res.solve(r.q);
  r.h_star = sol.f;
  r.resolvent_residual = sol.residual;
  r.multiplier = sol.multiplier;
  r.h_star_mean = integrate(r.h_star);
  r.h_star_normalized = normalized_response(r.h0, r.h_star);
  r.tail_bound = op.tail_bound;
  for (const auto& o : observables) r.observables.push_back({o.name, observable_integral(o, r.h_star_normalized)});
}

}  // namespace

DensityFunction derivative_operator_apply(const RandomSystem& system, const DensityFunction& h0, int cutoff,
                                          int quad_order) {
  const auto& basis = h0.basis();
  if (basis->kind() == BasisKind::PiecewiseConstant)
    throw UnsupportedOperation("the derivative formula needs a differentiable basis");
  const auto dh0 = differentiate(h0);
  const auto xs = node_vector(*basis);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(basis->size());
  for (const auto& c : system.components()) {
    const double dpi = c.weight.derivative(0.0);
    const double pi = c.weight(0.0);
    if (dpi != 0.0) q += dpi * (component_matrix(c, 0.0, *basis, xs, cutoff, quad_order) * h0.values());
    if (pi == 0.0 || c.eta.frozen()) continue;
    for (const auto& node : c.eta.nu_rule(0.0, quad_order)) {
      const auto set = c.family.with_param(node.u).branches(cutoff);
      for (std::size_t i = 0; i < xs.size(); ++i)
        q[static_cast<Eigen::Index>(i)] += pi * node.w * branch_param_derivative(set, h0, dh0, xs[i]);
    }
    for (const auto& node : c.eta.weight_rule(0.0)) {
      const auto set = c.family.with_param(node.u).branches(cutoff);
      for (std::size_t i = 0; i < xs.size(); ++i)
        q[static_cast<Eigen::Index>(i)] += pi * node.w * branch_sum(set, h0, xs[i]);
    }
  }
  return {basis, q};
}

ResponseReport response(const RandomSystem& system, const SolverOptions& opts, const std::vector<Observable>& observables) {
  const auto op = build_operator(system, 0.0, opts.make_basis(), opts.cutoff, opts.quad_order);
  auto st = stationary_solve(op);
  ResponseReport r{st.density, st.density, st.density, st.density, st.spectrum, 0.0, 0.0, 0.0, 0.0, 0.0, {}, {}};
  r.q = derivative_operator_apply(system, r.h0, opts.cutoff, opts.quad_order);
  fill_response(r, op, observables);
  return r;
}

ResponseReport deterministic_response(const MapFamily& family, const SolverOptions& opts) {
  if (!family.has_parameter()) throw ConfigError(to_string(family.kind()) + " has no parameter to differentiate");
  const auto op = build_operator(RandomSystem::single(family), 0.0, opts.make_basis(), opts.cutoff, opts.quad_order);
  auto st = stationary_solve(op);
  ResponseReport r{st.density, st.density, st.density, st.density, st.spectrum, 0.0, 0.0, 0.0, 0.0, 0.0, {}, {}};
  const auto dh = differentiate(r.h0);
  const auto& b = *op.basis;
  Eigen::VectorXd q(b.size());
  const auto set = family.branches(opts.cutoff);
  for (int i = 0; i < b.size(); ++i) {
    const double x = b.nodes()[i];
    double acc = 0.0;
    for (const auto& br : set.branches) {
      const auto j = br.jet(x);
      double t, t1, t2, dt, dt1;
      family.forward_jet(j.g, t, t1, t2);
      family.param_forward_jet(j.g, dt, dt1);
      const double a1 = -dt / t1;
      const double a2 = dt * t2 / (t1 * t1) - dt1 / t1;
      acc += (a1 * dh(j.g) + a2 * r.h0(j.g)) * std::abs(j.d1);
    }
    q[i] = acc;
  }
  r.q = DensityFunction(op.basis, q);
  fill_response(r, op, {});
  return r;
}

DensityFunction normalized_response(const DensityFunction& h0, const DensityFunction& h_star) {
  const double m = integrate(h0);
  if (std::abs(m - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "normalized_response: integral of h0 is " << m << ", expected 1";
    throw PreconditionError(os.str());
  }
  return h_star - h0 * integrate(h_star);
}

std::vector<FdEntry> finite_difference_check(const RandomSystem& system, const SolverOptions& opts,
                                             const std::vector<double>& eps_list, const ResponseReport& report,
                                             const std::vector<Observable>& observables) {
  const auto basis = report.h0.basis();
  auto solve = [&](double e) {
    return stationary_solve(build_operator(system, e, basis, opts.cutoff, opts.quad_order)).density;
  };
  std::vector<FdEntry> out;
  for (double eps : eps_list) {
    FdEntry fe;
    fe.eps = eps;
    const auto hp = solve(eps);
    DensityFunction quotient = (hp - report.h0) * (1.0 / eps);
    std::optional<DensityFunction> hm;
    if (system.admissible(-eps)) {
      fe.central = true;
      hm = solve(-eps);
      quotient = (hp - *hm) * (0.5 / eps);
    }
    const auto diff = quotient - report.h_star_normalized;
    fe.sup_error = sup_norm(diff);
    fe.c1_error = c1_norm(diff);
    fe.order = out.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : std::log(out.back().sup_error / fe.sup_error) / std::log(out.back().eps / eps);
    for (std::size_t k = 0; k < observables.size(); ++k) {
      const double a = observable_integral(observables[k], hp);
      const double b = hm ? observable_integral(observables[k], *hm) : observable_integral(observables[k], report.h0);
      const double fd = hm ? (a - b) / (2 * eps) : (a - b) / eps;
      fe.observable_errors.push_back(std::abs(fd - observable_integral(observables[k], report.h_star_normalized)));
    }
    out.push_back(std::move(fe));
  }
  return out;
}

std::vector<double> second_order_remainder(const RandomSystem& system, const SolverOptions& opts,
                                           const std::vector<double>& eps_list, const ResponseReport& report) {
  std::vector<double> out;
  for (double eps : eps_list) {
    const auto h = stationary_solve(build_operator(system, eps, report.h0.basis(), opts.cutoff, opts.quad_order)).density;
    out.push_back(sup_norm(h - report.h0 - report.h_star_normalized * eps) / (eps * eps));
  }
  return out;
}

}  // namespace randlr
