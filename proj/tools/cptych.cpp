// cptych: simulate coded-ptychography datasets and reconstruct them.
//
//   cptych simulate --config run.json --out data.cds [--seed N]
//   cptych reconstruct data.cds --config run.json --out result/ [--seed N]
//   cptych compare data.cds --config a.json --config b.json [...] --out cmp/ [--budget-seconds S]
//   cptych sweep-lambda data.cds --config run.json --lambdas 1e-4,1e-3,1e-2 --out sweep/
//
// Exit codes: 0 success, 1 I/O or runtime failure, 2 usage/config error,
// 3 reconstruction diverged (compare/sweep: at least one member failed).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cptych/commands.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

cptych::RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  cptych::RunConfig cfg = path.empty() ? cptych::parse_run_config(nlohmann::json::object())
                                       : cptych::load_run_config(path);
  if (seed) cfg.override_seed(*seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded ptychography simulation and reconstruction"};
  app.require_subcommand(1);

  std::string config, out, dataset;
  std::vector<std::string> configs, labels;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget;
  std::vector<double> lambdas;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset container");
  sim->add_option("--config", config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Output dataset path")->required();
  sim->add_option("--seed", seed, "Override the configured seeds");

  auto* rec = app.add_subcommand("reconstruct", "Reconstruct one dataset");
  rec->add_option("dataset", dataset, "Dataset container")->required()->check(CLI::ExistingFile);
  rec->add_option("--config", config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  rec->add_option("--out", out, "Output directory")->required();
  rec->add_option("--seed", seed, "Override the configured seeds");

  auto* cmp = app.add_subcommand("compare", "Run several solver configs on one dataset");
  cmp->add_option("dataset", dataset, "Dataset container")->required()->check(CLI::ExistingFile);
  cmp->add_option("--config", configs, "Run configuration, repeat for each member")->required()->check(CLI::ExistingFile);
  cmp->add_option("--label", labels, "Row label per config (default: algorithm name)");
  cmp->add_option("--out", out, "Output directory")->required();
  cmp->add_option("--budget-seconds", budget, "Wall-clock budget per member")->check(CLI::PositiveNumber);
  cmp->add_option("--seed", seed, "Override the configured seeds");

  auto* sweep = app.add_subcommand("sweep-lambda", "PPTV runs over a list of TV weights");
  sweep->add_option("dataset", dataset, "Dataset container")->required()->check(CLI::ExistingFile);
  sweep->add_option("--config", config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda values")->required()->delimiter(',');
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--seed", seed, "Override the configured seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) {
      const auto cfg = load_config(config, seed);
      const auto ds = cptych::cmd_simulate(cfg, out);
      std::printf("wrote %s: %zu frames of %zux%zu\n", out.c_str(), ds.measurements.frames.size(),
                  ds.measurements.frames.front().rows(), ds.measurements.frames.front().cols());
      return 0;
    }
    if (*rec) {
      const auto cfg = load_config(config, seed);
      const auto run = cptych::cmd_reconstruct(dataset, cfg, out);
      if (!run.ok()) {
        std::fprintf(stderr, "cptych: %s\n", run.error.c_str());
        if (run.last_good_iteration >= 0) {
          std::fprintf(stderr, "cptych: last good iteration %d\n", run.last_good_iteration);
          return kExitDiverged;
        }
        return kExitRuntime;
      }
      const auto row = cptych::summarize(run);
      std::printf("%s: %d iterations, fidelity %.6g, objective %.6g", row.algorithm.c_str(), row.iterations,
                  row.fidelity, row.objective);
      if (row.rmse) std::printf(", rmse %.6g", *row.rmse);
      std::printf("\n");
      return 0;
    }
    if (*cmp) {
      std::vector<cptych::RunConfig> cfgs;
      for (const auto& path : configs) cfgs.push_back(load_config(path, seed));
      if (!labels.empty() && labels.size() != cfgs.size()) throw cptych::ConfigError("--label must be given once per --config");
      const auto rows = cptych::cmd_compare(dataset, cfgs, labels, out, budget, cptych::threads_from_env());
      bool all_ok = true;
      for (const auto& r : rows) {
        std::printf("%-12s %-7s iters=%-6d rmse=%s %s\n", r.label.c_str(), r.algorithm.c_str(), r.iterations,
                    r.rmse ? std::to_string(*r.rmse).c_str() : "-", r.status.c_str());
        all_ok = all_ok && r.status == "ok";
      }
      return all_ok ? 0 : kExitDiverged;
    }
    if (*sweep) {
      const auto cfg = load_config(config, seed);
      const auto rows = cptych::cmd_sweep_lambda(dataset, cfg, lambdas, out, cptych::threads_from_env());
      bool all_ok = true;
      for (const auto& r : rows) {
        std::printf("lambda=%-10g iters=%-6d rmse=%s %s\n", r.lambda, r.iterations,
                    r.rmse ? std::to_string(*r.rmse).c_str() : "-", r.status.c_str());
        all_ok = all_ok && r.status == "ok";
      }
      return all_ok ? 0 : kExitDiverged;
    }
  } catch (const cptych::ConfigError& e) {
    std::fprintf(stderr, "cptych: config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "cptych: invalid input: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cptych: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
