#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qmem/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Collective quantum memory simulations"};
  app.set_version_flag("--version", qmem::software_version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a named experiment");
  std::string experiment, config_path, out_dir = ".", engine;
  std::uint64_t seed = 0;
  run->add_option("experiment", experiment, "Experiment name")->required()->check(CLI::IsMember(qmem::experiment_names()));
  run->add_option("--config", config_path, "YAML config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--engine", engine, "exact or bosonic (overrides the config)")->check(CLI::IsMember({"exact", "bosonic"}));

  auto* list = app.add_subcommand("list", "List experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qmem::exit_config;
  }

  if (*list) {
    for (const auto& name : qmem::experiment_names()) std::cout << name << '\n';
    return 0;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot read config " << config_path << '\n';
    return qmem::exit_config;
  }
  std::ostringstream text;
  text << in.rdbuf();

  qmem::RunRequest request;
  request.experiment = experiment;
  request.config_text = text.str();
  request.out_dir = out_dir;
  if (*seed_opt) request.seed = seed;
  if (!engine.empty()) request.engine = engine == "exact" ? qmem::Engine::exact : qmem::Engine::bosonic;

  const qmem::RunReport report = qmem::run_experiment(request);
  if (!report.error.empty()) {
    std::cerr << "error: " << report.error << '\n';
    return report.status;
  }
  for (const auto& a : report.assertions)
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : ": " + a.detail) << '\n';
  std::cout << "wrote " << report.csv_path << " and " << report.json_path << '\n';
  return report.status;
}
