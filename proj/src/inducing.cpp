#include "randlr/inducing.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "randlr/errors.hpp"

namespace randlr {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

Branch left_branch(double u) { return Branch(MapKind::LSV, 0, u); }

double induced_tol(double tail) { return std::max(kEigenTol, 10.0 * tail); }

}  // namespace

PanelGrid::PanelGrid(int panels, int nodes_per_panel) : panels_(panels), per_(nodes_per_panel) {
  if (panels < 1 || panels > 60) throw ConfigError("panel count must be in 1..60");
  points_.resize(size());
  weights_.resize(size());
  for (int m = 0; m < panels; ++m) {
    auto b = Basis::chebyshev(per_, std::ldexp(1.0, -(m + 2)), std::ldexp(1.0, -(m + 1)));
    points_.segment(m * per_, per_) = b->nodes();
    weights_.segment(m * per_, per_) = b->weights();
    bases_.push_back(std::move(b));
  }
}

double PanelGrid::lowest() const { return std::ldexp(1.0, -(panels_ + 1)); }

int PanelGrid::panel_of(double x) const {
  if (x >= 0.5) return 0;
  if (x <= 0.0) return panels_ - 1;
  int e = 0;
  std::frexp(x, &e);
  return std::clamp(-e - 1, 0, panels_ - 1);
}

int PanelGrid::row(double x, std::span<double> out, bool derivative) const {
  const int m = panel_of(x);
  if (derivative)
    bases_[static_cast<std::size_t>(m)]->deriv_row(x, out);
  else
    bases_[static_cast<std::size_t>(m)]->interp_row(x, out);
  return m * per_;
}

double PanelGrid::eval(const Eigen::VectorXd& values, double x) const {
  std::vector<double> r(static_cast<std::size_t>(per_));
  const int off = row(x, r);
  double s = 0.0;
  for (int k = 0; k < per_; ++k) s += r[static_cast<std::size_t>(k)] * values[off + k];
  return s;
}

double PanelGrid::eval_derivative(const Eigen::VectorXd& values, double x) const {
  std::vector<double> r(static_cast<std::size_t>(per_));
  const int off = row(x, r, true);
  double s = 0.0;
  for (int k = 0; k < per_; ++k) s += r[static_cast<std::size_t>(k)] * values[off + k];
  return s;
}

double InducedFunction::operator()(double x) const {
  if (x > 0.5) return delta(x);
  return grid->eval(left, x);
}

double InducedFunction::integral() const { return grid->weights().dot(left) + integrate(delta); }

InducedFunction InducedFunction::operator+(const InducedFunction& o) const { return {grid, left + o.left, delta + o.delta}; }
InducedFunction InducedFunction::operator-(const InducedFunction& o) const { return {grid, left - o.left, delta - o.delta}; }
InducedFunction InducedFunction::operator*(double s) const { return {grid, left * s, delta * s}; }

XnPair xn_sequence(const std::vector<double>& word, int n) {
  if (n < 1) throw ConfigError("xn_sequence: n must be >= 1");
  if (static_cast<int>(word.size()) < n) throw PreconditionError("xn_sequence: parameter word too short");
  double t = 0.5;
  for (int k = n - 2; k >= 0; --k) t = left_branch(word[static_cast<std::size_t>(k)])(t);
  double s = 0.5;
  for (int k = n - 1; k >= 1; --k) s = left_branch(word[static_cast<std::size_t>(k)])(s);
  return {t, 0.5 * (s + 1.0)};
}

int first_return_time(const std::vector<double>& word, double x) {
  if (!(x > 0.5 && x <= 1.0)) throw PreconditionError("first_return_time: x must lie in (1/2, 1]");
  double z = 2.0 * x - 1.0;
  int n = 1;
  while (z <= 0.5) {
    if (n >= static_cast<int>(word.size())) throw PreconditionError("first_return_time: word exhausted before return");
    z = MapFamily::lsv(word[static_cast<std::size_t>(n)]).forward(z);
    ++n;
  }
  return n;
}

InducedSystem::InducedSystem(RandomSystem base, InducedOptions opts) : base_(std::move(base)), opts_(opts) {
  for (const auto& c : base_.components())
    if (c.family.kind() != MapKind::LSV) throw ConfigError("inducing is implemented for LSV systems only");
  if (opts_.nmax < 2) throw ConfigError("nmax must be >= 2");
  delta_ = Basis::chebyshev(opts_.n_delta, 0.5, 1.0);
  grid_ = std::make_shared<const PanelGrid>(opts_.panels, opts_.panel_nodes);
}

namespace {

// Rows of the annealed left-branch operator (or of its eps-derivative) at the
// targets, acting on panel-grid values.
Eigen::SparseMatrix<double> left_operator(const InducedSystem& ind, double eps, const std::vector<double>& targets,
                                          bool derivative, int* extrapolated) {
  const auto& grid = *ind.grid();
  const int per = grid.nodes_per_panel();
  const int order = ind.options().quad_order;
  std::vector<double> r(static_cast<std::size_t>(per)), dr(static_cast<std::size_t>(per));
  Triplets trip;
  auto add_value = [&](int i, const Branch& b, double x, double coef) {
    const auto j = b.jet(x);
    if (extrapolated && grid.extrapolated(j.g)) ++*extrapolated;
    const int off = grid.row(j.g, r);
    for (int k = 0; k < per; ++k) trip.emplace_back(i, off + k, coef * j.d1 * r[static_cast<std::size_t>(k)]);
  };
  for (const auto& c : ind.base().components()) {
    const double pi = c.weight(eps);
    if (!derivative) {
      if (pi == 0.0) continue;
      for (const auto& node : c.eta.eta_rule(eps, order)) {
        const Branch b = left_branch(node.u);
        for (std::size_t i = 0; i < targets.size(); ++i) add_value(static_cast<int>(i), b, targets[i], pi * node.w);
      }
      continue;
    }
    const double dpi = c.weight.derivative(eps);
    if (dpi != 0.0)
      for (const auto& node : c.eta.eta_rule(eps, order)) {
        const Branch b = left_branch(node.u);
        for (std::size_t i = 0; i < targets.size(); ++i) add_value(static_cast<int>(i), b, targets[i], dpi * node.w);
      }
    if (pi == 0.0 || c.eta.frozen()) continue;
    for (const auto& node : c.eta.nu_rule(eps, order)) {
      const Branch b = left_branch(node.u);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const double x = targets[i];
        const auto j = b.jet(x);
        const auto p = b.param_jet(x);
        const int off = grid.row(j.g, r);
        grid.row(j.g, dr, true);
        // d/du [Psi(g) g'] = Psi'(g) dg g' + Psi(g) dg'
        for (int k = 0; k < per; ++k)
          trip.emplace_back(static_cast<int>(i), off + k,
                            pi * node.w *
                                (p.dg * j.d1 * dr[static_cast<std::size_t>(k)] + p.dg1 * r[static_cast<std::size_t>(k)]));
      }
    }
    for (const auto& node : c.eta.weight_rule(eps)) {
      const Branch b = left_branch(node.u);
      for (std::size_t i = 0; i < targets.size(); ++i) add_value(static_cast<int>(i), b, targets[i], pi * node.w);
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(targets.size()), grid.size());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::MatrixXd right_operator(const Basis& delta, const std::vector<double>& targets) {
  Eigen::MatrixXd w(static_cast<Eigen::Index>(targets.size()), delta.size());
  std::vector<double> r(static_cast<std::size_t>(delta.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    delta.interp_row(0.5 * (targets[i] + 1.0), r);
    for (int k = 0; k < delta.size(); ++k) w(static_cast<Eigen::Index>(i), k) = 0.5 * r[static_cast<std::size_t>(k)];
  }
  return w;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

InducedOperator induced_operator(const InducedSystem& ind, double eps) {
  ind.base().check_eps(eps);
  const int nmax = ind.options().nmax;
  const auto gpts = to_vector(ind.grid()->points());
  const auto dpts = to_vector(ind.delta_basis()->nodes());
  InducedOperator out;
  out.epsilon = eps;
  out.a_grid = left_operator(ind, eps, gpts, false, &out.extrapolated);
  out.a_delta = left_operator(ind, eps, dpts, false, nullptr);
  out.w_grid = right_operator(*ind.delta_basis(), gpts);
  out.w_delta = right_operator(*ind.delta_basis(), dpts);
  const auto& wd = ind.delta_basis()->weights();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(ind.delta_basis()->size());

  Eigen::MatrixXd m = out.w_delta;
  out.length_mass.push_back(wd.dot(out.w_delta * one));
  Eigen::MatrixXd b = out.w_grid;
  out.unfold = b;
  for (int n = 1; n < nmax; ++n) {
    const Eigen::MatrixXd t = out.a_delta * b;
    m += t;
    out.length_mass.push_back(wd.dot(t * one));
    b = out.a_grid * b;
    out.unfold += b;
  }
  double mass = 0.0;
  for (double v : out.length_mass) mass += v;
  out.tail_mass = 0.5 - mass;
  if (out.tail_mass > ind.options().tail_threshold) {
    std::ostringstream os;
    os << "induced word sum truncated with tail mass " << out.tail_mass << " > " << ind.options().tail_threshold
       << "; increase nmax";
    throw NumericalError(os.str(), out.tail_mass);
  }
  out.op.basis = ind.delta_basis();
  out.op.matrix = std::move(m);
  out.op.cutoff = nmax;
  out.op.quad_order = ind.options().quad_order;
  out.op.tail_bound = std::max(out.tail_mass, 0.0);
  out.op.epsilon = eps;
  return out;
}

DiscretizedOperator enumerated_induced_operator(double u, const BasisPtr& delta_basis, int nmax, double* tail_mass) {
  const int n = delta_basis->size();
  const Branch g = left_branch(u);
  DiscretizedOperator op;
  op.basis = delta_basis;
  op.cutoff = nmax;
  op.matrix = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = delta_basis->nodes()[i], d = 1.0;
    for (int len = 1; len <= nmax; ++len) {
      delta_basis->interp_row(0.5 * (t + 1.0), r);
      for (int k = 0; k < n; ++k) op.matrix(i, k) += 0.5 * d * r[static_cast<std::size_t>(k)];
      const auto j = g.jet(t);
      t = j.g;
      d *= j.d1;
    }
  }
  // words longer than nmax return from (1/2, x'_nmax], of length x_nmax / 2
  double x = 0.5;
  for (int k = 0; k < nmax - 1; ++k) x = g(x);
  op.tail_bound = 0.5 * x;
  if (tail_mass) *tail_mass = op.tail_bound;
  return op;
}

StationaryResult induced_stationary(const InducedOperator& op) { return stationary_solve(op.op, induced_tol(op.tail_mass)); }

InducedFunction unfold(const InducedSystem& ind, const InducedOperator& op, const DensityFunction& hhat) {
  return {ind.grid(), op.unfold * hhat.values(), hhat};
}

std::vector<Eigen::VectorXd> word_terms(const InducedSystem& ind, const InducedOperator& op, const DensityFunction& hhat) {
  std::vector<Eigen::VectorXd> s{op.w_grid * hhat.values()};
  for (int n = 1; n < ind.options().nmax; ++n) s.push_back(op.a_grid * s.back());
  return s;
}

InducedDerivative induced_derivative(const InducedSystem& ind, const InducedOperator& op0, const DensityFunction& hhat) {
  const int nmax = ind.options().nmax;
  const auto gpts = to_vector(ind.grid()->points());
  const auto dpts = to_vector(ind.delta_basis()->nodes());
  const auto d_grid = left_operator(ind, 0.0, gpts, true, nullptr);
  const auto d_delta = left_operator(ind, 0.0, dpts, true, nullptr);
  InducedDerivative out{DensityFunction::zero(hhat.basis()),
                        {ind.grid(), Eigen::VectorXd::Zero(ind.grid()->size()), DensityFunction::zero(hhat.basis())},
                        {},
                        {}};
  out.terms = word_terms(ind, op0, hhat);
  out.term_derivatives.push_back(Eigen::VectorXd::Zero(ind.grid()->size()));
  for (int n = 1; n < nmax; ++n)
    out.term_derivatives.push_back(d_grid * out.terms[static_cast<std::size_t>(n - 1)] +
                                   op0.a_grid * out.term_derivatives.back());
  Eigen::VectorXd s_sum = Eigen::VectorXd::Zero(ind.grid()->size()), ds_sum = s_sum;
  for (int n = 0; n + 1 < nmax; ++n) {
    s_sum += out.terms[static_cast<std::size_t>(n)];
    ds_sum += out.term_derivatives[static_cast<std::size_t>(n)];
  }
  out.q_hat.values() = d_delta * s_sum + op0.a_delta * ds_sum;
  out.q_corr.left = ds_sum + out.term_derivatives.back();
  return out;
}

InducedFunction q_correction(const InducedSystem& ind, const DensityFunction& hhat) {
  return induced_derivative(ind, induced_operator(ind, 0.0), hhat).q_corr;
}

namespace {

double weighted_norm(const InducedFunction& f, double gamma) {
  return h_norm([&](double x) { return f(x); }, gamma, h_norm_grid());
}

}  // namespace

InducedResponse full_response(const InducedSystem& ind) {
  const auto op0 = induced_operator(ind, 0.0);
  auto st = induced_stationary(op0);
  const auto der = induced_derivative(ind, op0, st.density);
  const Resolvent res(op0.op, st.density, st.spectrum.lambda1);
  const auto sol = res.solve(der.q_hat, std::numeric_limits<double>::infinity());
  const auto h = unfold(ind, op0, st.density);
  const auto fh = unfold(ind, op0, sol.f);
  InducedResponse r{st.density, sol.f, der.q_hat, h, fh + der.q_corr, fh, der.q_corr, st.spectrum};
  r.tail_mass = op0.tail_mass;
  r.q_hat_mean = integrate(der.q_hat);
  r.multiplier = sol.multiplier;
  r.resolvent_residual = sol.residual;
  r.h_norm = weighted_norm(r.h_star, ind.options().gamma);
  r.extrapolated = op0.extrapolated;
  return r;
}

namespace {

// Forward jets of T_u^k along a stored orbit: after the update,
// d = (T^k)', e = (T^k)'', s = d_u T^k, dd = d_u (T^k)'.
struct OrbitJet {
  double d = 1.0, e = 0.0, s = 0.0, dd = 0.0;
  void step(const MapFamily& f, double z) {
    double t, t1, t2, dt, dt1;
    f.forward_jet(z, t, t1, t2);
    f.param_forward_jet(z, dt, dt1);
    const double s_new = t1 * s + dt;
    const double dd_new = (t2 * s + dt1) * d + t1 * dd;
    e = t2 * d * d + t1 * e;
    d = t1 * d;
    s = s_new;
    dd = dd_new;
  }
  double a1() const { return -s / d; }
  double a2() const { return s * e / (d * d) - dd / d; }
};

}  // namespace

InducedResponse deterministic_induced_response(double u, const InducedOptions& opts) {
  const MapFamily fam = MapFamily::lsv(u);
  const Branch g = left_branch(u);
  const auto basis = Basis::chebyshev(opts.n_delta, 0.5, 1.0);
  const auto grid = std::make_shared<const PanelGrid>(opts.panels, opts.panel_nodes);
  const int nmax = opts.nmax;
  double tail = 0.0;
  const auto op = enumerated_induced_operator(u, basis, nmax, &tail);
  auto st = stationary_solve(op, induced_tol(tail));
  const auto& hh = st.density;
  const auto dh = differentiate(hh);

  // preimage chain t_0 = x, t_k = g(t_{k-1}) with (g^k)'(x)
  auto chain = [&](double x, std::vector<double>& t, std::vector<double>& dg) {
    t.assign(1, x);
    dg.assign(1, 1.0);
    for (int k = 1; k < nmax; ++k) {
      const auto j = g.jet(t.back());
      t.push_back(j.g);
      dg.push_back(dg.back() * j.d1);
    }
  };

  std::vector<double> t, dg;
  Eigen::VectorXd q(basis->size());
  for (int i = 0; i < basis->size(); ++i) {
    chain(basis->nodes()[i], t, dg);
    double acc = 0.0;
    for (int n = 1; n <= nmax; ++n) {
      // y in Δ returns after n steps: right branch, then n-1 left steps
      const double y = 0.5 * (t[static_cast<std::size_t>(n - 1)] + 1.0);
      OrbitJet jet;
      jet.d = 2.0;
      for (int k = n - 1; k >= 1; --k) jet.step(fam, t[static_cast<std::size_t>(k)]);
      acc += (jet.a1() * dh(y) + jet.a2() * hh(y)) / jet.d;
    }
    q[i] = acc;
  }
  const DensityFunction q_hat(basis, q);
  const Resolvent res(op, hh, st.spectrum.lambda1);
  const auto sol = res.solve(q_hat, std::numeric_limits<double>::infinity());

  // unfolding and correction on the panel grid, along the same chains
  Eigen::VectorXd f_h(grid->size()), f_star(grid->size()), corr(grid->size());
  for (int i = 0; i < grid->size(); ++i) {
    chain(grid->points()[i], t, dg);
    double a = 0.0, b = 0.0, c = 0.0;
    for (int n = 0; n < nmax; ++n) {
      const double tn = t[static_cast<std::size_t>(n)];
      const double y = 0.5 * (tn + 1.0);
      a += 0.5 * hh(y) * dg[static_cast<std::size_t>(n)];
      b += 0.5 * sol.f(y) * dg[static_cast<std::size_t>(n)];
      if (n == 0) continue;
      OrbitJet jet;
      for (int k = n; k >= 1; --k) jet.step(fam, t[static_cast<std::size_t>(k)]);
      c += (jet.a1() * 0.25 * dh(y) + jet.a2() * 0.5 * hh(y)) / jet.d;
    }
    f_h[i] = a;
    f_star[i] = b;
    corr[i] = c;
  }
  const InducedFunction h{grid, f_h, hh};
  const InducedFunction fh{grid, f_star, sol.f};
  const InducedFunction qc{grid, corr, DensityFunction::zero(basis)};
  InducedResponse r{hh, sol.f, q_hat, h, fh + qc, fh, qc, st.spectrum};
  r.tail_mass = tail;
  r.q_hat_mean = integrate(q_hat);
  r.multiplier = sol.multiplier;
  r.resolvent_residual = sol.residual;
  r.h_norm = weighted_norm(r.h_star, opts.gamma);
  return r;
}

std::vector<InducedFdEntry> induced_fd_check(const InducedSystem& ind, const std::vector<double>& eps_list,
                                             const InducedResponse& r) {
  const double gamma = ind.options().gamma;
  auto solve = [&](double e) {
    const auto op = induced_operator(ind, e);
    return unfold(ind, op, induced_stationary(op).density);
  };
  std::vector<InducedFdEntry> out;
  for (double eps : eps_list) {
    InducedFdEntry fe;
    fe.eps = eps;
    const auto hp = solve(eps);
    InducedFunction quotient = (hp - r.h) * (1.0 / eps);
    if (ind.base().admissible(-eps)) {
      fe.central = true;
      quotient = (hp - solve(-eps)) * (0.5 / eps);
    }
    const auto diff = quotient - r.h_star;
    fe.h_error = weighted_norm(diff, gamma);
    fe.l1_error = ind.grid()->weights().dot(diff.left.cwiseAbs()) +
                  ind.delta_basis()->weights().dot(diff.delta.values().cwiseAbs());
    fe.order = out.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : std::log(out.back().h_error / fe.h_error) / std::log(out.back().eps / eps);
    out.push_back(fe);
  }
  return out;
}

double unfold_fixed_point_defect(const InducedSystem& ind, const InducedFunction& h, double eps, double lo, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = lo + (1.0 - lo) * i / (points - 1);
    double lx = 0.5 * h(0.5 * (x + 1.0));
    for (const auto& c : ind.base().components()) {
      const double pi = c.weight(eps);
      for (const auto& node : c.eta.eta_rule(eps, ind.options().quad_order)) {
        const auto j = left_branch(node.u).jet(x);
        lx += pi * node.w * h(j.g) * j.d1;
      }
    }
    worst = std::max(worst, std::abs(lx - h(x)));
  }
  return worst;
}

double induced_expansion(const InducedSystem& ind, double eps, int grid) {
  double worst = 0.0;
  for (const auto& c : ind.base().components())
    for (const auto& node : c.eta.eta_rule(eps, ind.options().quad_order)) {
      const Branch g = left_branch(node.u);
      for (int i = 0; i < grid; ++i) {
        double t = 0.5 + 0.5 * i / (grid - 1), d = 0.5;
        worst = std::max(worst, d);
        for (int n = 1; n < ind.options().nmax; ++n) {
          const auto j = g.jet(t);
          t = j.g;
          d *= j.d1;
          worst = std::max(worst, d);
        }
      }
    }
  return worst;
}

HalfCheck pm_half_check(double alpha0, double alpha_hi, const InducedOptions& opts) {
  const RandomSystem sys({Component{MapFamily::lsv(alpha0), Polynomial::constant(1.0),
                                    ParameterDistribution::uniform_to_dirac(alpha0, alpha_hi)}});
  const InducedSystem ind(sys, opts);
  const auto rnd = full_response(ind);
  const auto det = deterministic_induced_response(alpha0, opts);
  HalfCheck hc;
  hc.alpha0 = alpha0;
  hc.gamma = opts.gamma;
  hc.random_norm = rnd.h_norm;
  hc.deterministic_norm = det.h_norm;
  hc.ratio = rnd.h_norm / det.h_norm;
  hc.defect = h_norm([&](double x) { return rnd.h_star(x) - 0.5 * det.h_star(x); }, opts.gamma, h_norm_grid());
  hc.tail_mass = rnd.tail_mass;
  hc.random = std::make_shared<const InducedResponse>(rnd);
  hc.deterministic = std::make_shared<const InducedResponse>(det);
  return hc;
}

}  // namespace randlr
