#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "randlr/function_space.hpp"
#include "randlr/map_families.hpp"
#include "randlr/parameter_distributions.hpp"
#include "randlr/quadrature.hpp"

namespace randlr {

/// One family in the mixture: maps T_u with u ~ eta_eps, chosen with
/// probability pi(eps).
struct Component {
  MapFamily family;
  Polynomial weight;
  ParameterDistribution eta;
};

class RandomSystem {
 public:
  RandomSystem() = default;
  explicit RandomSystem(std::vector<Component> components);

  const std::vector<Component>& components() const { return components_; }
  Domain domain() const { return components_.front().family.domain(); }
  bool countable() const;
  /// Intersection of the eta eps-ranges. admissible() also checks the weights.
  std::pair<double, double> eps_range() const { return {eps_min_, eps_max_}; }
  bool admissible(double eps) const;
  void check_eps(double eps) const;
  /// True when nothing depends on eps.
  bool frozen() const;

  /// The deterministic system made of one map.
  static RandomSystem single(const MapFamily& family);

 private:
  std::vector<Component> components_;
  double eps_min_ = -ParameterDistribution::kInf;
  double eps_max_ = ParameterDistribution::kInf;
};

struct DiscretizedOperator {
  BasisPtr basis;
  /// Dense collocation matrix; empty for Ulam.
  Eigen::MatrixXd matrix;
  /// Ulam transition matrix, column j = distribution of images of bin j.
  Eigen::SparseMatrix<double> sparse;
  int cutoff = 0;
  int quad_order = 0;
  double tail_bound = 0.0;
  double epsilon = 0.0;

  bool is_ulam() const { return basis->kind() == BasisKind::PiecewiseConstant; }
  int size() const { return basis->size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  DensityFunction apply(const DensityFunction& f) const;
};

/// Rows of the operator for one component at fixed eps, unweighted by pi.
/// Target points may differ from the basis nodes.
Eigen::MatrixXd component_matrix(const Component& c, double eps, const Basis& basis, const std::vector<double>& targets,
                                 int cutoff, int quad_order, double* tail_bound = nullptr);

DiscretizedOperator build_operator(const RandomSystem& system, double eps, BasisPtr basis, int cutoff, int quad_order);

/// Ulam matrix from exact preimages of the bin edges.
DiscretizedOperator ulam_operator(const RandomSystem& system, double eps, int bins, int quad_order = 16);

struct SpectrumReport {
  double lambda1 = 0.0;
  double lambda2_abs = 0.0;
  double gap = 0.0;
  double min_value = 0.0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

struct StationaryResult {
  DensityFunction density;
  SpectrumReport spectrum;
};

/// Tolerance on |lambda1 - 1|.
inline constexpr double kEigenTol = 1e-8;

StationaryResult stationary_solve(const DiscretizedOperator& op, double eigen_tol = kEigenTol);
DensityFunction stationary_density(const DiscretizedOperator& op);

struct ResolventResult {
  DensityFunction f;
  double residual = 0.0;
  /// Lagrange multiplier of the bordered system; zero in exact arithmetic.
  double multiplier = 0.0;
  double rcond = 0.0;
};

/// Solves (lambda I - L) f = q with integrate(f) = 0 through the bordered
/// system [[lambda I - M, h0], [w^T, 0]]. With lambda the dominant eigenvalue
/// of a truncated operator this is the derivative of the normalized
/// eigenvector, and q need not be mean-zero (pass mean_tol = inf).
class Resolvent {
 public:
  Resolvent(const DiscretizedOperator& op, const DensityFunction& h0, double lambda = 1.0);
  ResolventResult solve(const DensityFunction& q, double mean_tol = 1e-9) const;
  double rcond() const { return rcond_; }

 private:
  BasisPtr basis_;
  Eigen::MatrixXd m_;
  double lambda_ = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0.0;
};

ResolventResult resolvent_solve(const DiscretizedOperator& op, const DensityFunction& q);

/// |integrate(L phi) - integrate(phi)|.
double duality_defect(const DiscretizedOperator& op, const DensityFunction& phi);

/// max |(g_a o g_b)'| over branch pairs n, k <= nmax and a uniform grid.
double second_iterate_expansion(const MapFamily& outer, const MapFamily& inner, int nmax, int grid);

/// max over a uniform grid of sum_k pi_k(eps) / |T_k'(x)|, each family at its
/// distribution's anchor parameter.
double average_expansion(const RandomSystem& system, double eps, int grid);

}  // namespace randlr
