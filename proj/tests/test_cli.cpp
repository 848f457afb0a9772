#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "randlr/app.hpp"
#include "randlr/config.hpp"
#include "randlr/errors.hpp"

using namespace randlr;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path out_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / "randlr_cli_test" / name;
  fs::remove_all(p);
  return p;
}

RunOptions quiet(const fs::path& dir) {
  RunOptions o;
  o.out_dir = dir.string();
  o.verbosity = 0;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json report(const fs::path& dir, const std::string& command) {
  return nlohmann::json::parse(slurp(dir / (command + ".json")));
}

const char* kGauss = "[family.g]\nkind = gauss\n[solver]\nn = 40\ncutoff = 100000\n";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse(
      "; mixture\n[family.a]\nkind = circle\nparam = 0.05\nweight = 0.5, 1\n"
      "[family.b]\nkind = circle\nweight = 0.5, -1\n"
      "[solver]\nbasis = fourier\ncutoff = 1\neps = 0.1, 0.05\nobservables = x, cos2pi\n"
      "[mc]\nseed = 9\nlength = 20000\n");
  REQUIRE(cfg.families.size() == 2);
  CHECK(cfg.families[0].name == "a");
  CHECK(cfg.families[0].weight == std::vector<double>{0.5, 1.0});
  CHECK(cfg.solver.basis == BasisKind::Fourier);
  CHECK(cfg.solver.n == 65);
  CHECK(cfg.eps_list == std::vector<double>{0.1, 0.05});
  CHECK(cfg.mc.seed == 9);
  const auto sys = cfg.system();
  CHECK(sys.components().size() == 2);
  CHECK(sys.components()[0].weight(0.1) == doctest::Approx(0.6));
  const auto j = cfg.to_json();
  CHECK(j["solver"]["basis"].get<std::string>() == to_string(BasisKind::Fourier));
  CHECK(j["families"][1]["weight"][1].get<double>() == -1.0);

  const auto pm = parse(
      "[family.pm]\nkind = lsv\nparam = 0.25\ndist.kind = pm_smooth\ndist.alpha0 = 0.25\ndist.alpha1 = 0.45\n"
      "[inducing]\nnmax = 30\ngamma = 0.7\n");
  CHECK(pm.inducing);
  CHECK(pm.induced.nmax == 30);
  CHECK(pm.system().components()[0].eta.kind() == DistKind::SmoothDensity);

  const auto mix = parse("[family.c]\nkind = circle\nparam = 0.05\ndist.kind = dirac_mixture\n"
                         "dist.atoms = 0.05, 0.1\ndist.weights = 0.5, 1; 0.5, -1\ndist.lo = 0\ndist.hi = 0.15\n");
  CHECK(mix.families[0].dist.weights.size() == 2);
  CHECK(mix.system().components()[0].eta.atoms().size() == 2);
}

TEST_CASE("config errors carry the line") {
  CHECK(error_of("[family.a]\nkind = gauss\nweight = 1, x\n").find("test.ini:3") != std::string::npos);
  CHECK(error_of("[family.a]\nkind = spiral\n").find("test.ini:2") != std::string::npos);
  CHECK(error_of("[family.a]\nkind = gauss\n\n[solver]\nn = two\n").find("test.ini:5") != std::string::npos);
  CHECK(error_of("[solver]\nbogus = 1\n").find("unknown key") != std::string::npos);
  CHECK(error_of("[family.a\nkind = gauss\n").find("test.ini:1") != std::string::npos);
  CHECK(error_of("[family.a]\nkind = gauss\n[extra]\n").find("test.ini:3") != std::string::npos);
  CHECK(error_of("[solver]\nobservables = y\n").find("unknown observable") != std::string::npos);
  CHECK(error_of("[family.a]\nkind = lsv\ndist.kind = dirac_mixture\ndist.atoms = 0.2\n").find("test.ini") !=
        std::string::npos);
  CHECK_THROWS_AS(parse("[solver]\nn = 40\n").system(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), ConfigError);
  CHECK_THROWS_AS(named_observable("nope"), ConfigError);
}

TEST_CASE("density on the Gauss map") {
  const auto dir = out_dir("gauss");
  CHECK(run_command("density", parse(kGauss), quiet(dir)) == kExitOk);
  const auto r = report(dir, "density");
  CHECK(r["status"] == "ok");
  CHECK(r["config"]["solver"]["cutoff"] == 100000);
  std::ifstream csv(dir / "density.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x,h");
  double worst = 0.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma)), h = std::stod(line.substr(comma + 1));
    worst = std::max(worst, std::abs(h - 1.0 / ((1.0 + x) * std::log(2.0))));
    ++rows;
  }
  CHECK(rows == 1001);
  CHECK(worst <= 1e-6);
}

TEST_CASE("exit codes") {
  const auto dir = out_dir("codes");
  CHECK(run_command("check-hypotheses", parse("[family.pm]\nkind = lsv\nparam = 0.3\n"), quiet(dir)) == kExitHypothesis);
  CHECK(report(dir, "check-hypotheses")["satisfied"] == false);
  CHECK(run_command("check-hypotheses", parse(kGauss), quiet(dir)) == kExitOk);
  CHECK(run_command("response", parse("[family.pm]\nkind = lsv\nparam = 0.3\n"), quiet(dir)) == kExitHypothesis);
  CHECK(run_command("density", parse("[family.a]\nkind = circle\n[solver]\nbasis = chebyshev\n"), quiet(dir)) ==
        kExitConfig);
  CHECK(report(dir, "density")["status"] == "error");
  CHECK(run_command("induced-response",
                    parse("[family.pm]\nkind = lsv\nparam = 0.3\ndist.kind = dirac_translate\ndist.lo = 0.1\n"
                          "dist.hi = 0.9\n[inducing]\nnmax = 3\n"),
                    quiet(dir)) == kExitNumerical);
  CHECK(run_command("not-a-command", parse(kGauss), quiet(dir)) == kExitConfig);
}

TEST_CASE("fd-check report and idempotence") {
  const std::string text =
      "[family.a]\nkind = circle\nparam = 0.05\nweight = 0.5, 1\n[family.b]\nkind = circle\nweight = 0.5, -1\n"
      "[solver]\nbasis = fourier\ncutoff = 1\nquad_order = 16\nobservables = cos2pi\n";
  const auto d1 = out_dir("fd1"), d2 = out_dir("fd2");
  CHECK(run_command("fd-check", parse(text), quiet(d1)) == kExitOk);
  CHECK(run_command("fd-check", parse(text), quiet(d2)) == kExitOk);
  CHECK(slurp(d1 / "fd-check.json") == slurp(d2 / "fd-check.json"));
  CHECK(slurp(d1 / "fd-check.csv") == slurp(d2 / "fd-check.csv"));
  const auto r = report(d1, "fd-check");
  CHECK(r["finite_differences"].size() == 3);
  CHECK(r["finite_differences"][2]["order"].get<double>() >= 1.8);
  CHECK(r["response"]["observables"].contains("cos2pi"));
}

TEST_CASE("mc is reproducible and seed-overridable") {
  const std::string text = "[family.g]\nkind = gauss\n[solver]\nn = 40\n[mc]\nlength = 20000\nreplicas = 2\nbins = 20\n";
  const auto d1 = out_dir("mc1"), d2 = out_dir("mc2"), d3 = out_dir("mc3");
  CHECK(run_command("mc", parse(text), quiet(d1)) == kExitOk);
  CHECK(run_command("mc", parse(text), quiet(d2)) == kExitOk);
  auto o = quiet(d3);
  o.seed = 77;
  CHECK(run_command("mc", parse(text), o) == kExitOk);
  CHECK(slurp(d1 / "mc_histogram.csv") == slurp(d2 / "mc_histogram.csv"));
  CHECK(slurp(d1 / "mc_histogram.csv") != slurp(d3 / "mc_histogram.csv"));
  CHECK(report(d3, "mc")["config"]["mc"]["seed"] == 77);
}

TEST_CASE("pm half check report") {
  const auto dir = out_dir("half");
  CHECK(run_command("pm-half-check", parse("[inducing]\nnmax = 40\n[pm]\nalpha0 = 0.25\nalpha_hi = 0.45\n"), quiet(dir)) ==
        kExitOk);
  const auto r = report(dir, "pm-half-check");
  CHECK(r["ratio"].get<double>() >= 0.45);
  CHECK(r["ratio"].get<double>() <= 0.55);
  CHECK(fs::exists(dir / "pm-half-check.csv"));
}
