#include <CLI11.hpp>
#include <iostream>

#include "fluctrel/errors.hpp"
#include "fluctrel/runner.hpp"

using namespace fluctrel;

int main(int argc, char** argv) {
  CLI::App app{"fluctrel: diffusion time-reversal and fluctuation-relation workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false, workers_set = false, json_mode = false;
  int workers = 1;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment configuration");
    cmd->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--workers", workers, "worker threads")->each([&](const std::string&) {
      workers_set = true;
    });
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--override", overrides, "key=value config overrides")
        ->take_all();
  };

  auto* run = app.add_subcommand("run", "execute a named check");
  add_run_flags(run);

  auto* cat = app.add_subcommand("catalog", "list processes, schemes, and checks");
  cat->add_flag("--json", json_mode, "machine-readable output");

  auto* sim = app.add_subcommand("simulate", "write raw sample paths to CSV");
  add_run_flags(sim);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cat->parsed()) {
      std::cout << catalog_text(json_mode);
      return 0;
    }

    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::from_json_file(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);
    if (seed_set) cfg.seed = seed;
    if (workers_set) cfg.workers = workers;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (sim->parsed()) cfg.check = "simulate";

    try {
      cfg.validate();
    } catch (const ConfigInvalid& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }

    int rc = run_experiment(cfg);
    std::cout << (rc == 0 ? "PASS" : "FAIL") << " check=" << cfg.check
              << " process=" << cfg.process << " scheme=" << cfg.scheme
              << " out=" << cfg.out << "\n";
    return rc;
  } catch (const ConfigInvalid& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
