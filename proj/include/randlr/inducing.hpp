#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <span>
#include <vector>

#include "randlr/annealed_operator.hpp"
#include "randlr/linear_response.hpp"

namespace randlr {

/// Piecewise Chebyshev grid on (0, 1/2] with dyadic panels
/// [2^-(m+2), 2^-(m+1)], m = 0..panels-1. Points below the lowest panel are
/// extrapolated from it.
class PanelGrid {
 public:
  PanelGrid(int panels, int nodes_per_panel);

  int panels() const { return panels_; }
  int nodes_per_panel() const { return per_; }
  int size() const { return panels_ * per_; }
  const Eigen::VectorXd& points() const { return points_; }
  /// Clenshaw-Curtis weights over the covered range.
  const Eigen::VectorXd& weights() const { return weights_; }
  double lowest() const;
  bool extrapolated(double x) const { return x < lowest(); }

  int panel_of(double x) const;
  /// Interpolation (or derivative) weights at x: offset of the panel in the
  /// grid and nodes_per_panel values.
  int row(double x, std::span<double> out, bool derivative = false) const;
  double eval(const Eigen::VectorXd& values, double x) const;
  double eval_derivative(const Eigen::VectorXd& values, double x) const;

 private:
  int panels_, per_;
  std::vector<BasisPtr> bases_;
  Eigen::VectorXd points_, weights_;
};

/// A function on (0,1]: panel values on (0,1/2] and a Chebyshev density on Δ = [1/2,1].
struct InducedFunction {
  std::shared_ptr<const PanelGrid> grid;
  Eigen::VectorXd left;
  DensityFunction delta;

  double operator()(double x) const;
  double integral() const;
  InducedFunction operator+(const InducedFunction& o) const;
  InducedFunction operator-(const InducedFunction& o) const;
  InducedFunction operator*(double s) const;
};

struct InducedOptions {
  int n_delta = 41;
  int nmax = 40;
  int panels = 40;
  int panel_nodes = 32;
  int quad_order = 24;
  double tail_threshold = 1e-2;
  double gamma = 0.6;
};

/// x_n(w) = g_{w0} o ... o g_{w_{n-2}}(1/2) and x'_n(w) = (x_n(sigma w) + 1)/2.
struct XnPair {
  double x = 0.0;
  double x_prime = 0.0;
};
XnPair xn_sequence(const std::vector<double>& word, int n);

/// Smallest n >= 1 with T_{w_{n-1}} o ... o T_{w_0}(x) in (1/2, 1], by
/// direct iteration. The first step uses the right branch.
int first_return_time(const std::vector<double>& word, double x);

/// First-return system of an LSV random system to Δ = (1/2, 1].
class InducedSystem {
 public:
  InducedSystem(RandomSystem base, InducedOptions opts = {});

  const RandomSystem& base() const { return base_; }
  const InducedOptions& options() const { return opts_; }
  const BasisPtr& delta_basis() const { return delta_; }
  const std::shared_ptr<const PanelGrid>& grid() const { return grid_; }

 private:
  RandomSystem base_;
  InducedOptions opts_;
  BasisPtr delta_;
  std::shared_ptr<const PanelGrid> grid_;
};

/// Induced operator at one eps. With W Phi = Phi((y+1)/2)/2 and the annealed
/// left-branch operator A, the words of return time n+1 contribute
/// S_n = A^n W Phi; L_hat = sum_{n<nmax} S_n on Δ, and the unfolding on
/// (0,1/2] is the same sum.
struct InducedOperator {
  double epsilon = 0.0;
  DiscretizedOperator op;
  /// Unfolding on the panel grid, |G| x n_delta.
  Eigen::MatrixXd unfold;
  Eigen::SparseMatrix<double> a_grid, a_delta;
  Eigen::MatrixXd w_grid, w_delta;
  /// 1/2 - integral over Δ of L_hat 1.
  double tail_mass = 0.0;
  /// Integral over Δ of the return-time-n part of L_hat 1, n = 1..nmax.
  std::vector<double> length_mass;
  int extrapolated = 0;
};

InducedOperator induced_operator(const InducedSystem& ind, double eps);

/// Classical induced operator of the single map T_u, assembled word by word
/// along explicit preimage chains.
DiscretizedOperator enumerated_induced_operator(double u, const BasisPtr& delta_basis, int nmax, double* tail_mass = nullptr);

StationaryResult induced_stationary(const InducedOperator& op);

InducedFunction unfold(const InducedSystem& ind, const InducedOperator& op, const DensityFunction& hhat);

struct InducedDerivative {
  /// d/deps L_hat hhat on the Δ nodes.
  DensityFunction q_hat;
  /// Q hhat on the panel grid; zero on Δ.
  InducedFunction q_corr;
  /// Per-length terms S_n and their eps-derivatives on the panel grid.
  std::vector<Eigen::VectorXd> terms, term_derivatives;
};

InducedDerivative induced_derivative(const InducedSystem& ind, const InducedOperator& op0, const DensityFunction& hhat);

/// S_n(eps) on the panel grid for n = 0..nmax-1.
std::vector<Eigen::VectorXd> word_terms(const InducedSystem& ind, const InducedOperator& op, const DensityFunction& hhat);

InducedFunction q_correction(const InducedSystem& ind, const DensityFunction& hhat);

struct InducedResponse {
  DensityFunction hhat, hhat_star, q_hat;
  InducedFunction h, h_star, f_hstar, q_corr;
  SpectrumReport spectrum;
  double tail_mass = 0.0;
  double q_hat_mean = 0.0;
  double multiplier = 0.0;
  double resolvent_residual = 0.0;
  double h_norm = 0.0;
  int extrapolated = 0;
};

InducedResponse full_response(const InducedSystem& ind);

/// The same quantities for the single map T_u perturbed to T_{u+eps}, via
/// forward jets of the induced map (A1, A2 of the classical formula) on
/// the enumerated induced operator.
InducedResponse deterministic_induced_response(double u, const InducedOptions& opts);

struct InducedFdEntry {
  double eps = 0.0;
  bool central = false;
  double h_error = 0.0;
  double l1_error = 0.0;
  double order = 0.0;
};

/// Difference quotients of F_eps(hhat_eps) against h_star in the H-norm.
std::vector<InducedFdEntry> induced_fd_check(const InducedSystem& ind, const std::vector<double>& eps_list,
                                             const InducedResponse& r);

/// sup over points >= lo of |L_P F(hhat) - F(hhat)| on a uniform grid.
double unfold_fixed_point_defect(const InducedSystem& ind, const InducedFunction& h, double eps, double lo, int points);

/// max |g_z'| over Δ for constant words built from each parameter node, |z| <= nmax.
double induced_expansion(const InducedSystem& ind, double eps, int grid);

struct HalfCheck {
  double alpha0 = 0.0;
  double gamma = 0.0;
  double random_norm = 0.0;
  double deterministic_norm = 0.0;
  double ratio = 0.0;
  /// sup x^gamma |h*_random - h*_det / 2|.
  double defect = 0.0;
  double tail_mass = 0.0;
  std::shared_ptr<const InducedResponse> random, deterministic;
};

HalfCheck pm_half_check(double alpha0, double alpha_hi, const InducedOptions& opts);

}  // namespace randlr
