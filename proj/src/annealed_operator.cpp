#include "randlr/annealed_operator.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <unordered_map>

#include "randlr/errors.hpp"

namespace randlr {

RandomSystem::RandomSystem(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("random system has no components");
  const Domain d = components_.front().family.domain();
  for (const auto& c : components_) {
    if (c.family.domain() != d) throw ConfigError("all families of a random system must share one domain");
    const auto [lo, hi] = c.eta.eps_range();
    eps_min_ = std::max(eps_min_, lo);
    eps_max_ = std::min(eps_max_, hi);
    if (!c.family.has_parameter() && !c.eta.frozen())
      throw ConfigError(to_string(c.family.kind()) + " has no parameter; its distribution must be fixed");
    if (c.family.has_parameter()) {
      const auto [plo, phi] = c.family.param_range();
      const auto [slo, shi] = c.eta.support();
      if (slo < plo || shi > phi) {
        std::ostringstream os;
        os << "parameter distribution support [" << slo << ", " << shi << "] leaves the admissible interval of "
           << to_string(c.family.kind());
        throw ConfigError(os.str());
      }
    }
  }
  if (eps_min_ > 0.0 || eps_max_ < 0.0) throw ConfigError("eps = 0 is not admissible for this system");
  double s = 0.0;
  for (const auto& c : components_) s += c.weight(0.0);
  if (std::abs(s - 1.0) > 1e-12) throw ConfigError("family weights do not sum to 1 at eps = 0");
}

RandomSystem RandomSystem::single(const MapFamily& family) {
  return RandomSystem({Component{family, Polynomial::constant(1.0), ParameterDistribution::fixed(family.param())}});
}

bool RandomSystem::countable() const {
  return std::any_of(components_.begin(), components_.end(), [](const Component& c) { return c.family.countable(); });
}

bool RandomSystem::admissible(double eps) const {
  if (eps < eps_min_ || eps > eps_max_) return false;
  double s = 0.0;
  for (const auto& c : components_) {
    if (!c.eta.admissible(eps)) return false;
    const double w = c.weight(eps);
    if (w < -1e-14 || w > 1.0 + 1e-14) return false;
    s += w;
  }
  return std::abs(s - 1.0) <= 1e-12;
}

void RandomSystem::check_eps(double eps) const {
  if (!admissible(eps)) {
    std::ostringstream os;
    os << "eps = " << eps << " is outside the admissible neighbourhood [" << eps_min_ << ", " << eps_max_ << "]";
    throw ConfigError(os.str());
  }
}

bool RandomSystem::frozen() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const Component& c) { return c.eta.frozen() && c.weight.is_constant(); });
}

Eigen::VectorXd DiscretizedOperator::apply(const Eigen::VectorXd& v) const {
  if (is_ulam()) return sparse * v;
  return matrix * v;
}

DensityFunction DiscretizedOperator::apply(const DensityFunction& f) const { return {basis, apply(f.values())}; }

namespace {

void check_basis(Domain d, const Basis& b) {
  if (d == Domain::Circle && b.kind() == BasisKind::Chebyshev)
    throw ConfigError("circle maps need a fourier or ulam basis");
  if (d == Domain::UnitInterval && b.kind() == BasisKind::Fourier)
    throw ConfigError("interval maps need a chebyshev or ulam basis");
}

}  // namespace

Eigen::MatrixXd component_matrix(const Component& c, double eps, const Basis& basis, const std::vector<double>& targets,
                                 int cutoff, int quad_order, double* tail_bound) {
  if (basis.kind() == BasisKind::PiecewiseConstant) throw UnsupportedOperation("use ulam_operator for the Ulam basis");
  const int n = basis.size();
  const auto m = static_cast<int>(targets.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  const auto rule = c.eta.eta_rule(eps, quad_order);
  // tail integrals of the cardinal functions
  const auto tail_rule = gauss_legendre(n / 2 + 4, 0.0, 1.0);
  double tb = 0.0;
  for (const auto& node : rule) {
    if (node.w == 0.0) continue;
    const MapFamily fam = c.family.has_parameter() ? c.family.with_param(node.u) : c.family;
    const auto set = fam.branches(cutoff);
    tb = std::max(tb, set.tail_bound);
    for (int i = 0; i < m; ++i) {
      const double x = targets[static_cast<std::size_t>(i)];
      auto r = out.row(i);
      for (const auto& b : set.branches) {
        const auto j = b.jet(x);
        basis.interp_row(j.g, row);
        const double s = node.w * std::abs(j.d1);
        for (int k = 0; k < n; ++k) r[k] += s * row[static_cast<std::size_t>(k)];
      }
      if (fam.countable()) {
        const auto piece = fam.tail_piece(cutoff, x);
        const double len = piece.hi - piece.lo;
        for (const auto& q : tail_rule) {
          basis.interp_row(piece.lo + len * q.u, row);
          const double s = node.w * len * q.w;
          for (int k = 0; k < n; ++k) r[k] += s * row[static_cast<std::size_t>(k)];
        }
      }
    }
  }
  if (tail_bound) *tail_bound = tb;
  return out;
}

DiscretizedOperator build_operator(const RandomSystem& system, double eps, BasisPtr basis, int cutoff, int quad_order) {
  system.check_eps(eps);
  check_basis(system.domain(), *basis);
  if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
  DiscretizedOperator op;
  op.basis = basis;
  op.cutoff = cutoff;
  op.quad_order = quad_order;
  op.epsilon = eps;
  const int n = basis->size();
  op.matrix = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> targets(basis->nodes().data(), basis->nodes().data() + n);
  for (const auto& c : system.components()) {
    const double w = c.weight(eps);
    if (w == 0.0) continue;
    double tb = 0.0;
    op.matrix += w * component_matrix(c, eps, *basis, targets, cutoff, quad_order, &tb);
    op.tail_bound += w * tb;
  }
  return op;
}

DiscretizedOperator ulam_operator(const RandomSystem& system, double eps, int bins, int quad_order) {
  if (bins < 64) throw ConfigError("ulam_operator: need at least 64 bins");
  system.check_eps(eps);
  DiscretizedOperator op;
  op.basis = Basis::piecewise_constant(bins);
  op.epsilon = eps;
  op.quad_order = quad_order;
  op.cutoff = bins;
  const double h = 1.0 / bins;
  std::unordered_map<long long, double> acc;
  acc.reserve(static_cast<std::size_t>(bins) * 64);
  // P(i, j) = |bin j ∩ T^-1 bin i| / h, from the preimages of the bin edges
  auto add = [&](int i, int j, double v) { acc[static_cast<long long>(i) * bins + j] += v; };
  for (const auto& c : system.components()) {
    const double cw = c.weight(eps);
    if (cw == 0.0) continue;
    for (const auto& node : c.eta.eta_rule(eps, quad_order)) {
      const MapFamily fam = c.family.has_parameter() ? c.family.with_param(node.u) : c.family;
      const double w = cw * node.w / h;
      for (const auto& b : fam.branches(bins).branches) {
        double prev = b(0.0);
        for (int i = 0; i < bins; ++i) {
          const double next = b((i + 1) * h);
          double lo = std::min(prev, next), hi = std::max(prev, next);
          prev = next;
          const int j0 = std::clamp(static_cast<int>(std::floor(lo / h)), 0, bins - 1);
          const int j1 = std::clamp(static_cast<int>(std::floor(hi / h)), 0, bins - 1);
          for (int j = j0; j <= j1; ++j) {
            const double ov = std::min(hi, (j + 1) * h) - std::max(lo, j * h);
            if (ov > 0.0) add(i, j, w * ov);
          }
        }
      }
      if (fam.countable()) {
        // the omitted branches all land in the extreme source bin
        const int j = fam.kind() == MapKind::Gauss ? 0 : bins - 1;
        op.tail_bound = std::max(op.tail_bound, h * h);
        // sum_{n > K} |g_n(bin i)| ~ int_{bin i} dx / (K + 1/2 + x)
        for (int i = 0; i < bins; ++i)
          add(i, j, w * std::log((bins + 0.5 + (i + 1) * h) / (bins + 0.5 + i * h)));
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(acc.size());
  for (const auto& [k, v] : acc) trip.emplace_back(static_cast<int>(k / bins), static_cast<int>(k % bins), v);
  op.sparse.resize(bins, bins);
  op.sparse.setFromTriplets(trip.begin(), trip.end());
  return op;
}

namespace {

StationaryResult ulam_stationary(const DiscretizedOperator& op) {
  const int n = op.size();
  Eigen::SparseMatrix<double> a(n, n);
  a.setIdentity();
  a -= op.sparse;
  // replace the last (dependent) equation by the normalization
  Eigen::SparseMatrix<double> at = a.transpose();
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < at.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(at, k); it; ++it)
      if (it.col() != n - 1) trip.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()), it.value());
  const auto& w = op.basis->weights();
  for (int j = 0; j < n; ++j) trip.emplace_back(n - 1, j, w[j]);
  Eigen::SparseMatrix<double> b(n, n);
  b.setFromTriplets(trip.begin(), trip.end());
  b.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(b);
  if (lu.info() != Eigen::Success) throw NumericalError("ulam stationary solve: factorization failed", 0.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::VectorXd h = lu.solve(rhs);
  StationaryResult r{DensityFunction(op.basis, h), {}};
  r.spectrum.lambda1 = 1.0;
  r.spectrum.lambda2_abs = std::nan("");
  r.spectrum.gap = std::nan("");
  r.spectrum.min_value = h.minCoeff();
  r.spectrum.residual = (op.sparse * h - h).cwiseAbs().maxCoeff();
  r.spectrum.warnings.push_back("spectral gap not computed for ulam operators");
  return r;
}

}  // namespace

StationaryResult stationary_solve(const DiscretizedOperator& op, double eigen_tol) {
  if (op.is_ulam()) return ulam_stationary(op);
  const int n = op.size();
  Eigen::EigenSolver<Eigen::MatrixXd> es(op.matrix, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed", 0.0);
  std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  SpectrumReport rep;
  rep.lambda1 = ev[0].real();
  rep.lambda2_abs = n > 1 ? std::abs(ev[1]) : 0.0;
  rep.gap = 1.0 - rep.lambda2_abs;
  const double dev = std::abs(ev[0] - 1.0);
  if (dev > eigen_tol) {
    std::ostringstream os;
    os.precision(17);
    os << "dominant eigenvalue " << ev[0].real() << (ev[0].imag() >= 0 ? "+" : "") << ev[0].imag()
       << "i is not 1 (deviation " << dev << ")";
    throw HypothesisViolation(os.str(), dev);
  }
  if (!(rep.gap > 1e-10)) {
    std::ostringstream os;
    os << "no discrete spectral gap: |lambda2| = " << rep.lambda2_abs;
    throw HypothesisViolation(os.str(), rep.lambda2_abs);
  }
  const auto& w = op.basis->weights();
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = op.matrix - rep.lambda1 * Eigen::MatrixXd::Identity(n, n);
  a.row(n) = w.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = 1.0;
  Eigen::VectorXd h = a.colPivHouseholderQr().solve(rhs);
  rep.residual = (op.matrix * h - h).cwiseAbs().maxCoeff();
  rep.min_value = h.minCoeff();
  if (rep.min_value < -1e-8) {
    std::ostringstream os;
    os << "stationary density takes negative values (min " << rep.min_value << ")";
    rep.warnings.push_back(os.str());
  }
  return {DensityFunction(op.basis, std::move(h)), std::move(rep)};
}

DensityFunction stationary_density(const DiscretizedOperator& op) { return stationary_solve(op).density; }

Resolvent::Resolvent(const DiscretizedOperator& op, const DensityFunction& h0, double lambda)
    : basis_(op.basis), m_(op.matrix), lambda_(lambda) {
  if (op.is_ulam()) throw UnsupportedOperation("resolvent on the Ulam basis");
  const int n = op.size();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 1, n + 1);
  b.topLeftCorner(n, n) = lambda * Eigen::MatrixXd::Identity(n, n) - op.matrix;
  b.topRightCorner(n, 1) = h0.values();
  b.bottomLeftCorner(1, n) = op.basis->weights().transpose();
  lu_.compute(b);
  rcond_ = lu_.rcond();
  if (!(rcond_ > 1e-14)) throw NumericalError("resolvent system is singular (rcond estimate)", rcond_);
}

ResolventResult Resolvent::solve(const DensityFunction& q, double mean_tol) const {
  const int n = basis_->size();
  const double mean = basis_->weights().dot(q.values());
  if (std::abs(mean) > mean_tol) {
    std::ostringstream os;
    os << "resolvent right-hand side is not mean-zero (integral " << mean << ")";
    throw PreconditionError(os.str());
  }
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = q.values();
  rhs[n] = 0.0;
  Eigen::VectorXd x = lu_.solve(rhs);
  ResolventResult r{DensityFunction(basis_, x.head(n)), 0.0, x[n], rcond_};
  r.residual = (lambda_ * x.head(n) - m_ * x.head(n) - q.values()).cwiseAbs().maxCoeff();
  return r;
}

ResolventResult resolvent_solve(const DiscretizedOperator& op, const DensityFunction& q) {
  const auto h0 = stationary_density(op);
  return Resolvent(op, h0).solve(q);
}

double duality_defect(const DiscretizedOperator& op, const DensityFunction& phi) {
  const auto& w = op.basis->weights();
  return std::abs(w.dot(op.apply(phi.values())) - w.dot(phi.values()));
}

double second_iterate_expansion(const MapFamily& outer, const MapFamily& inner, int nmax, int grid) {
  const auto bo = outer.branches(nmax).branches;
  const auto bi = inner.branches(nmax).branches;
  double m = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) / (grid - 1);
    for (const auto& b : bi) {
      const auto ji = b.jet(x);
      for (const auto& a : bo) m = std::max(m, std::abs(a.jet(ji.g).d1 * ji.d1));
    }
  }
  return m;
}

double average_expansion(const RandomSystem& system, double eps, int grid) {
  double m = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) / (grid - 1);
    double s = 0.0;
    for (const auto& c : system.components()) {
      double t, t1, t2;
      c.family.with_param(c.eta.anchor()).forward_jet(x, t, t1, t2);
      if (std::isfinite(t1) && t1 != 0.0) s += c.weight(eps) / std::abs(t1);
    }
    m = std::max(m, s);
  }
  return m;
}

}  // namespace randlr
