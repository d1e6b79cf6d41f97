#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cptych/config.hpp"
#include "cptych/io.hpp"
#include "cptych/solvers.hpp"

namespace cptych {

/// Builds the synthetic dataset described by the scenario and geometry
/// sections (ground truth and coded surface embedded).
DatasetContainer build_dataset(const RunConfig& cfg);

/// Writes the dataset to `out_path`.
DatasetContainer cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_path);

struct RunOutcome {
  std::string label;
  Algorithm algorithm = Algorithm::PPTV;
  std::optional<ReconstructionState> state;
  std::string error;  // empty on success
  int last_good_iteration = -1;
  double seconds = 0.0;

  bool ok() const noexcept { return error.empty(); }
};

/// Starting object and coded surface for a run, per the solver section.
struct InitialGuess {
  ComplexField object;
  CodedSurface cs;
};
InitialGuess initial_guess(const DatasetContainer& ds, const SolverSection& sec);

/// Runs one reconstruction. `budget_seconds`, when set, replaces the config's
/// time budget; with cs_update_start = "half" the iteration count is first
/// calibrated so that half of the budget is spent before surface updates.
RunOutcome reconstruct(const DatasetContainer& ds, const RunConfig& cfg, std::optional<double> budget_seconds = {});

/// Writes object.cca, coded_surface.cca, trace.csv, summary.json and (if
/// enabled) 16-bit amplitude/phase previews into `out_dir`.
void write_run_outputs(const RunOutcome& run, const RunConfig& cfg, const std::filesystem::path& out_dir);

RunOutcome cmd_reconstruct(const std::filesystem::path& dataset_path, const RunConfig& cfg,
                           const std::filesystem::path& out_dir);

struct CompareRow {
  std::string label;
  std::string algorithm;
  int iterations = 0;
  double fidelity = 0.0;
  double objective = 0.0;
  std::optional<double> rmse;
  double seconds = 0.0;
  std::string status = "ok";
};

/// Runs every config against the same dataset (matched wall-clock budget when
/// given) and writes compare.csv plus one run_<i>/ directory per member.
std::vector<CompareRow> cmd_compare(const std::filesystem::path& dataset_path, const std::vector<RunConfig>& configs,
                                    const std::vector<std::string>& labels, const std::filesystem::path& out_dir,
                                    std::optional<double> budget_seconds, int threads = 1);

struct SweepRow {
  double lambda = 0.0;
  int iterations = 0;
  double fidelity = 0.0;
  double objective = 0.0;
  std::optional<double> rmse;
  double seconds = 0.0;
  std::string status = "ok";
};

/// One PPTV run per lambda; writes sweep.csv. Failed runs are recorded and the
/// sweep continues.
std::vector<SweepRow> cmd_sweep_lambda(const std::filesystem::path& dataset_path, const RunConfig& cfg,
                                       const std::vector<double>& lambdas, const std::filesystem::path& out_dir,
                                       int threads = 1);

/// Parallelism cap from CPTYCH_THREADS (default 1).
int threads_from_env();

CompareRow summarize(const RunOutcome& run);

}  // namespace cptych
