#pragma once

#include <functional>
#include <string>
#include <vector>

#include "randlr/annealed_operator.hpp"

namespace randlr {

struct SolverOptions {
  BasisKind basis = BasisKind::Chebyshev;
  /// Number of nodes (Chebyshev-Lobatto points, Fourier samples or Ulam bins).
  int n = 41;
  int cutoff = 100000;
  int quad_order = 24;

  BasisPtr make_basis() const;
};

struct Observable {
  std::string name;
  std::function<double(double)> phi;
};

struct ObservableResponse {
  std::string name;
  double value = 0.0;
};

struct FdEntry {
  double eps = 0.0;
  bool central = false;
  double sup_error = 0.0;
  double c1_error = 0.0;
  /// log2 ratio against the previous entry; NaN for the first.
  double order = 0.0;
  std::vector<double> observable_errors;
};

struct ResponseReport {
  DensityFunction h0;
  DensityFunction q;
  DensityFunction h_star;
  DensityFunction h_star_normalized;
  SpectrumReport spectrum;
  double q_mean = 0.0;
  double h_star_mean = 0.0;
  double resolvent_residual = 0.0;
  double multiplier = 0.0;
  double tail_bound = 0.0;
  std::vector<ObservableResponse> observables;
  std::vector<FdEntry> fd_estimates;
};

/// q = d/deps L_eps h0 at eps = 0 from the analytic derivative formulas,
/// sampled at the basis nodes.
DensityFunction derivative_operator_apply(const RandomSystem& system, const DensityFunction& h0, int cutoff,
                                          int quad_order);

ResponseReport response(const RandomSystem& system, const SolverOptions& opts,
                        const std::vector<Observable>& observables = {});

/// (I - L_u)^{-1} L_u [A1 h_u' + A2 h_u] for the single map T_u, with
/// A1 = -d_uT / T', A2 = d_uT T'' / T'^2 - d_uT' / T'.
ResponseReport deterministic_response(const MapFamily& family, const SolverOptions& opts);

DensityFunction normalized_response(const DensityFunction& h0, const DensityFunction& h_star);

/// Difference quotients of the stationary density against h_star_normalized.
/// Central where -eps is admissible, one-sided otherwise.
std::vector<FdEntry> finite_difference_check(const RandomSystem& system, const SolverOptions& opts,
                                             const std::vector<double>& eps_list, const ResponseReport& report,
                                             const std::vector<Observable>& observables = {});

/// ||h_eps - h0 - eps h*||_inf / eps^2 for each eps.
std::vector<double> second_order_remainder(const RandomSystem& system, const SolverOptions& opts,
                                           const std::vector<double>& eps_list, const ResponseReport& report);

}  // namespace randlr
