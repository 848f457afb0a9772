#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <limits>
#include <string>
#include <vector>

#include "randlr/annealed_operator.hpp"
#include "randlr/inducing.hpp"
#include "randlr/linear_response.hpp"

namespace randlr {

struct DistSpec {
  std::string kind = "fixed";  // fixed | dirac_translate | dirac_mixture | pm_smooth | uniform_to_dirac
  double a = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::vector<double> atoms;
  std::vector<std::vector<double>> weights;
  double alpha0 = 0.0, alpha1 = 0.0;
};

struct FamilySpec {
  std::string name;  // section name
  std::string kind;  // circle | gauss | renyi | lsv
  double param = 0.0;
  std::vector<double> weight{1.0};
  DistSpec dist;
};

struct McSpec {
  std::uint64_t seed = 1;
  long length = 1000000;
  long burn_in = 1000;
  int bins = 100;
  int replicas = 10;
  double eps = 0.05;
};

struct PmSpec {
  double alpha0 = 0.25;
  double alpha_hi = 0.45;
};

/// Everything a command needs, resolved with defaults.
struct RunConfig {
  std::string source;
  std::vector<FamilySpec> families;
  SolverOptions solver;
  int ulam_bins = 0;
  std::vector<double> eps_list{1e-2, 5e-3, 2.5e-3};
  bool inducing = false;
  InducedOptions induced;
  McSpec mc;
  PmSpec pm;
  std::vector<std::string> observables;
  int grid_points = 1001;

  RandomSystem system() const;
  nlohmann::json to_json() const;
};

/// INI text: [family.NAME] sections, [solver], [inducing], [mc], [pm],
/// [output]. Throws ConfigError with the offending line.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// x, x2, cos2pi, sin2pi
Observable named_observable(const std::string& name);

}  // namespace randlr
