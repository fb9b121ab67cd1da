// twistlab: spectral experiments on twisted and bent waveguide tubes.
//
//   twistlab run <config.json> [--out DIR] [--threads N] [--seed S]
//   twistlab report <manifest.json>
//   twistlab export-mesh <config.json> [--out DIR]
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdint>
#include <iostream>
#include <string>

#include "twistlab/errors.hpp"
#include "twistlab/experiments.hpp"
#include "twistlab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral experiments on twisted and bent waveguide tubes"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  CLI::App* run = app.add_subcommand("run", "execute a scenario and write its artifacts");
  run->add_option("config", config_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory (default: $TWISTLAB_OUT or ./runs)");
  run->add_option("--threads", threads, "Eigen thread count (0 = default)");
  run->add_option("--seed", seed, "override the solver seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });

  CLI::App* report = app.add_subcommand("report", "verify and render a finished run");
  report->add_option("manifest", manifest_path, "manifest.json of a run")->required();

  CLI::App* mesh = app.add_subcommand("export-mesh", "write the tube surface as OBJ");
  mesh->add_option("config", config_path, "scenario JSON file")->required();
  mesh->add_option("--out", out_dir, "output directory (default: $TWISTLAB_OUT or ./runs)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) Eigen::setNbThreads(threads);

    if (run->parsed()) {
      const twistlab::Scenario sc = twistlab::load_scenario(config_path);
      twistlab::RunOptions opt;
      opt.out_dir = out_dir;
      opt.threads = threads;
      if (seed_given) opt.seed = seed;
      const twistlab::RunOutcome out = twistlab::run_scenario(sc, opt);
      std::cout << "wrote " << out.manifest.string() << "\n";
      for (const std::string& f : out.files) std::cout << "  " << f << "\n";
    } else if (report->parsed()) {
      std::cout << twistlab::render_report(manifest_path);
    } else if (mesh->parsed()) {
      const twistlab::Scenario sc = twistlab::load_scenario(config_path);
      twistlab::RunOptions opt;
      opt.out_dir = out_dir;
      const twistlab::RunOutcome out = twistlab::export_mesh(sc, opt);
      std::cout << "wrote " << out.manifest.string() << "\n";
      for (const std::string& f : out.files) std::cout << "  " << f << "\n";
    }
  } catch (const twistlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const twistlab::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
