#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "randlr/annealed_operator.hpp"
#include "randlr/linear_response.hpp"

namespace randlr {

/// Counter-based generator: every variate is a hash of (seed, replica, step,
/// stream), so runs at different eps see the same randomness.
struct CounterRng {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;

  std::uint64_t bits(std::uint64_t step, std::uint64_t stream) const;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t step, std::uint64_t stream) const;
};

struct OrbitSpec {
  RandomSystem system;
  double eps = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t replica = 0;
  long burn_in = 1000;
  long length = 100000;
  std::vector<Observable> observables;
  int bins = 100;
  int batches = 50;
};

struct ObservableEstimate {
  std::string name;
  double mean = 0.0;
  /// batch-means standard error
  double std_error = 0.0;
};

struct OrbitStats {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  long length = 0;
  /// density estimate per bin (integrates to 1)
  std::vector<double> histogram;
  std::vector<ObservableEstimate> observables;
  /// points re-drawn after leaving the open interval (Gauss at x = 1/n)
  long redraws = 0;
};

/// Next state of the random orbit at step `step`.
double random_step(const RandomSystem& system, double eps, const CounterRng& rng, std::uint64_t step, double x);

OrbitStats sample_orbit(const OrbitSpec& spec);

/// Replicas 0..n-1 of the same spec on up to `threads` threads, returned by
/// replica index.
std::vector<OrbitStats> sample_replicas(const OrbitSpec& spec, int replicas, int threads = 1);

/// Histogram pooled over replicas with equal weights.
std::vector<double> pooled_histogram(const std::vector<OrbitStats>& runs);

/// L1 distance between a histogram on [0,1] and the bin averages of f.
double histogram_l1(const std::vector<double>& histogram, const std::function<double(double)>& f);

struct BootstrapL1 {
  /// L1 distance between the pooled histogram and the reference density
  double distance = 0.0;
  /// 95% quantile of the L1 distance between replica-resampled and pooled histograms
  double ci = 0.0;
  bool pass = false;
};

/// pass iff distance <= factor * ci.
BootstrapL1 bootstrap_l1(const std::vector<OrbitStats>& runs, const std::function<double(double)>& density,
                         int resamples = 400, std::uint64_t seed = 7, double factor = 3.0);

struct McResponseCheck {
  double fd_estimate = 0.0;
  double fd_std_error = 0.0;
  double operator_prediction = 0.0;
  /// operator central difference minus the prediction (the O(eps^2) bias)
  double bias = 0.0;
  double z_score = 0.0;
};

/// Central difference of ergodic averages of phi at +-eps with common random
/// numbers, against the operator prediction integral phi h*_normalized.
McResponseCheck mc_response_check(const RandomSystem& system, const SolverOptions& opts, const Observable& phi,
                                  double eps, std::uint64_t seed, long length = 1000000, int replicas = 4,
                                  int threads = 1);

}  // namespace randlr
