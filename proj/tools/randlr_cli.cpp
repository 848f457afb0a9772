#include <CLI11.hpp>
#include <iostream>

#include "randlr/app.hpp"
#include "randlr/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Linear response of iid random compositions of interval and circle maps"};
  app.require_subcommand(1);
  std::string config;
  randlr::RunOptions opts;
  opts.verbosity = randlr::verbosity_from_env();
  std::uint64_t seed = 0;
  for (const auto& name : randlr::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", opts.out_dir, "directory for the JSON report and CSV files");
    sub->add_option("--seed", seed, "overrides [mc] seed");
    sub->add_option("--threads", opts.threads, "worker threads for independent replicas")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : randlr::kExitConfig;
  }
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) opts.seed = seed;
  randlr::RunConfig cfg;
  try {
    cfg = randlr::load_config(config);
  } catch (const randlr::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return randlr::kExitConfig;
  }
  return randlr::run_command(sub->get_name(), std::move(cfg), opts);
}
