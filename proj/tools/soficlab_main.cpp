#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "soficlab/config.hpp"
#include "soficlab/io.hpp"
#include "soficlab/parallel.hpp"
#include "soficlab/runner.hpp"
#include "soficlab/suite.hpp"

int main(int argc, char** argv) {
  CLI::App app{"soficlab: finite-scale experiments with approximate "
               "homomorphisms, IRS statistics, Theta-Bernoulli extensions "
               "and conjugacy search"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "cap worker threads (results are unaffected)");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the experiment pipelines");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")
      ->required();

  std::string describe_path;
  auto* describe_cmd =
      app.add_subcommand("describe", "validate and summarize a config");
  describe_cmd->add_option("config", describe_path, "experiment config (JSON)")
      ->required();

  std::string suite_out;
  auto* suite_cmd =
      app.add_subcommand("suite", "run the acceptance experiment catalog");
  suite_cmd->add_option("--out", suite_out, "also write suite.csv here");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) soficlab::set_thread_cap(threads);

  try {
    if (*run_cmd) {
      auto cfg = soficlab::ExperimentConfig::load(config_path);
      soficlab::RunReport report = soficlab::run_experiment(cfg);
      std::cout << "report: " << cfg.output_dir << "/report.json\n";
      std::cout << (report.all_pass ? "all checks passed"
                                    : "SOME CHECKS FAILED")
                << " (" << report.seconds << "s)\n";
      return report.all_pass ? 0 : 1;
    }
    if (*describe_cmd) {
      auto cfg = soficlab::ExperimentConfig::load(describe_path);
      std::cout << soficlab::describe_config(cfg);
      return 0;
    }
    if (*suite_cmd) {
      auto results = soficlab::run_acceptance(&std::cout);
      bool all = true;
      for (const auto& r : results) all = all && r.pass;
      if (!suite_out.empty()) {
        std::filesystem::create_directories(suite_out);
        std::ofstream os(std::filesystem::path(suite_out) / "suite.csv");
        soficlab::CsvWriter csv(os);
        csv.row({"id", "name", "pass", "seconds", "detail"});
        for (const auto& r : results)
          csv.row({std::to_string(r.id), r.name, r.pass ? "1" : "0",
                   std::to_string(r.seconds), r.detail});
      }
      std::cout << (all ? "acceptance suite passed" : "ACCEPTANCE SUITE FAILED")
                << "\n";
      return all ? 0 : 1;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
