#pragma once

#include <string>
#include <vector>

namespace randlr {

enum class MapKind { ExpandingCircle, Gauss, Renyi, LSV };
enum class Domain { Circle, UnitInterval };

std::string to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& name);

/// Inverse branch g and its x-derivatives at one point.
struct BranchJet {
  double g = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// Derivatives of g and g' with respect to the family parameter.
struct ParamJet {
  double dg = 0.0;   // d/du g_u(x)
  double dg1 = 0.0;  // d/du g_u'(x)
};

/// One inverse branch of a map from a family. `index` is the branch label:
/// 0/1 for the two laps of a circle map, n >= 1 for Gauss/Renyi, 0 (left,
/// closed at 1/2) and 1 (right) for LSV.
class Branch {
 public:
  Branch(MapKind kind, int index, double param) : kind_(kind), index_(index), param_(param) {}

  MapKind kind() const { return kind_; }
  int index() const { return index_; }
  double param() const { return param_; }

  double operator()(double x) const { return jet(x).g; }
  BranchJet jet(double x) const;
  /// g^(order)(x), order in 0..3.
  double derivative(double x, int order) const;
  ParamJet param_jet(double x) const;
  /// Image g([0,1]) as an interval [lo, hi].
  std::pair<double, double> range() const;

 private:
  MapKind kind_;
  int index_;
  double param_;
};

/// Tail of a countable branch sum, sum_{n > cutoff} Phi(g_n(x)) |g_n'(x)|,
/// approximated by the integral of Phi over [lo, hi] (midpoint Euler-Maclaurin
/// in the branch index).
struct TailPiece {
  double lo = 0.0;
  double hi = 0.0;
};

struct BranchSet {
  std::vector<Branch> branches;
  /// sum over omitted branches of sup |g'|; zero for finite families.
  double tail_bound = 0.0;
};

/// A map T_u from one of the supported families. For ExpandingCircle the
/// parameter is lambda, for LSV it is the exponent u; Gauss and Renyi ignore it.
class MapFamily {
 public:
  MapFamily(MapKind kind, double param);

  static MapFamily expanding_circle(double lambda) { return {MapKind::ExpandingCircle, lambda}; }
  static MapFamily gauss() { return {MapKind::Gauss, 0.0}; }
  static MapFamily renyi() { return {MapKind::Renyi, 0.0}; }
  static MapFamily lsv(double u) { return {MapKind::LSV, u}; }

  MapKind kind() const { return kind_; }
  double param() const { return param_; }
  Domain domain() const;
  bool countable() const { return kind_ == MapKind::Gauss || kind_ == MapKind::Renyi; }
  bool has_parameter() const { return kind_ == MapKind::ExpandingCircle || kind_ == MapKind::LSV; }

  /// Same family at another parameter value (validated).
  MapFamily with_param(double p) const { return {kind_, p}; }

  double forward(double x) const;
  /// T, T', T'' at x on the monotone lap containing x (lifted, no mod 1).
  void forward_jet(double x, double& t, double& t1, double& t2) const;

  /// d/du T_u and d/du T_u' at x (zero for parameter-free families).
  void param_forward_jet(double x, double& dt, double& dt1) const;

  BranchSet branches(int cutoff) const;
  /// Tail pieces for x, valid for countable families only.
  TailPiece tail_piece(int cutoff, double x) const;

  /// Admissible parameter interval.
  std::pair<double, double> param_range() const;

 private:
  MapKind kind_;
  double param_;
};

double forward_map(const MapFamily& family, double x);
BranchSet branches(const MapFamily& family, int cutoff);
double inverse_branch_derivative(const Branch& branch, double x, int order);

struct ExpansionReport {
  double beta = 0.0;
  bool satisfied = false;  // beta < 1
  std::string message;
};

/// max over grid and branches of |g'|. Never throws on beta >= 1; the
/// report carries the violation.
ExpansionReport check_expansion(const MapFamily& family, int grid_size, int cutoff = 100);

/// max over grid pairs and branches of |g'(x)/g'(y) - 1| / |x - y|.
double check_distortion(const MapFamily& family, int grid_size, int cutoff = 100);

}  // namespace randlr
