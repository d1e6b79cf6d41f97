#include "cptych/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include "cptych/metrics.hpp"
#include "cptych/scenario.hpp"

namespace cptych {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kUnboundedIterations = 1 << 30;

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_optional(const std::optional<double>& v) { return v ? csv_number(*v) : std::string{}; }

// Runs jobs 0..n-1 on up to `threads` workers.
template <typename Fn>
void run_pool(std::size_t n, int threads, Fn&& job) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

int threads_from_env() {
  if (const char* v = std::getenv("CPTYCH_THREADS")) {
    const int n = std::atoi(v);
    if (n >= 1) return n;
  }
  return 1;
}

DatasetContainer build_dataset(const RunConfig& cfg) {
  const auto& sc = cfg.scenario;
  sc.validate(cfg.geometry.sr_ratio);
  const ComplexField truth = make_ground_truth(sc);
  CodedSurface cs = make_coded_surface(sc.rows, sc.cols, sc.seed, sc.cs_min_modulus);
  const double span = sc.position_span > 0.0 ? sc.position_span : static_cast<double>(sc.rows) / 8.0 * cfg.geometry.pitch;
  const auto positions = make_positions(sc.num_positions, span, parse_position_mode(sc.position_mode), sc.seed);

  NoiseSpec noise = cfg.noise;
  if (auto* p = std::get_if<PoissonNoise>(&noise)) p->seed = sc.seed;

  DatasetContainer ds;
  ds.measurements = simulate_dataset(truth, cs, positions, cfg.geometry, noise);
  ds.object_rows = sc.rows;
  ds.object_cols = sc.cols;
  ds.ground_truth = truth;
  ds.coded_surface = std::move(cs);
  ds.seed = sc.seed;
  ds.config_hash = cfg.hash();
  return ds;
}

DatasetContainer cmd_simulate(const RunConfig& cfg, const fs::path& out_path) {
  DatasetContainer ds = build_dataset(cfg);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_dataset(out_path, ds);
  return ds;
}

InitialGuess initial_guess(const DatasetContainer& ds, const SolverSection& sec) {
  CodedSurface cs;
  if (sec.init_surface == SurfaceInit::Container) {
    if (!ds.coded_surface) throw ConfigError("dataset has no coded surface; set solver.init_surface.source to \"ones\"");
    cs = *ds.coded_surface;
  } else {
    cs = CodedSurface::ones(ds.object_rows, ds.object_cols);
  }
  if (sec.surface_perturbation) cs = perturb_coded_surface(cs, *sec.surface_perturbation);

  ComplexField object;
  if (sec.init_object == ObjectInit::Truth) {
    if (!ds.ground_truth) throw ConfigError("solver.init_object is \"truth\" but the dataset has no ground truth");
    object = *ds.ground_truth;
  } else {
    object = flat_initial_object(ds.measurements, cs);
  }
  return InitialGuess{std::move(object), std::move(cs)};
}

RunOutcome reconstruct(const DatasetContainer& ds, const RunConfig& cfg, std::optional<double> budget_seconds) {
  RunOutcome out;
  out.algorithm = cfg.solver.solver.algorithm;
  out.label = std::string(to_string(out.algorithm));
  const auto start = std::chrono::steady_clock::now();
  try {
    const InitialGuess init = initial_guess(ds, cfg.solver);
    SolverConfig sc = cfg.solver.resolved();
    if (budget_seconds) {
      if (cfg.solver.cs_start_rule == CsStartRule::Half) {
        sc.outer_iters = iterations_for_budget(ds.measurements, init.object, init.cs, sc, *budget_seconds);
        sc.cs_update_start = sc.outer_iters / 2;
        sc.time_budget_seconds.reset();
      } else {
        sc.outer_iters = kUnboundedIterations;
        sc.time_budget_seconds = *budget_seconds;
      }
    }
    out.state = run_reconstruction(ds.measurements, init.object, init.cs, sc, ds.ground_truth);
  } catch (const DivergenceError& e) {
    out.error = e.what();
    out.last_good_iteration = e.last_good_iteration();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

CompareRow summarize(const RunOutcome& run) {
  CompareRow row;
  row.label = run.label;
  row.algorithm = std::string(to_string(run.algorithm));
  row.seconds = run.seconds;
  if (!run.ok()) {
    row.status = "error: " + run.error;
    if (run.last_good_iteration >= 0) row.status += " (last good iteration " + std::to_string(run.last_good_iteration) + ")";
    return row;
  }
  const auto& st = *run.state;
  row.iterations = st.iteration;
  if (!st.trace.empty()) {
    const auto& last = st.trace.back();
    row.fidelity = last.fidelity;
    row.objective = last.objective;
    row.rmse = last.rmse;
    row.seconds = last.seconds;
  }
  return row;
}

void write_run_outputs(const RunOutcome& run, const RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  json summary = {{"algorithm", std::string(to_string(run.algorithm))}, {"config", to_json(cfg)}};
  if (!run.ok()) {
    summary["status"] = "error";
    summary["error"] = run.error;
    summary["last_good_iteration"] = run.last_good_iteration;
  } else {
    const auto& st = *run.state;
    write_complex_array(out_dir / "object.cca", st.object);
    write_complex_array(out_dir / "coded_surface.cca", st.cs.transmittance());
    {
      std::ofstream trace(out_dir / "trace.csv");
      trace_export(st.trace, trace);
    }
    const CompareRow row = summarize(run);
    summary["status"] = "ok";
    summary["iterations"] = row.iterations;
    summary["fidelity"] = row.fidelity;
    summary["objective"] = row.objective;
    summary["rmse"] = row.rmse ? json(*row.rmse) : json(nullptr);
    summary["seconds"] = row.seconds;
    summary["flags"] = st.trace.flags;

    if (cfg.output.previews) {
      RealGrid amp(st.object.rows(), st.object.cols()), phase(st.object.rows(), st.object.cols());
      double amp_max = 0.0;
      for (std::size_t i = 0; i < st.object.size(); ++i) {
        amp[i] = std::abs(st.object[i]);
        phase[i] = std::arg(st.object[i]);
        amp_max = std::max(amp_max, amp[i]);
      }
      // Amplitude: [0, max] -> 0..65535. Phase: [-pi, pi] -> 0..65535.
      write_pgm(out_dir / "amplitude.pgm", to_pgm16(amp, 0.0, amp_max > 0.0 ? amp_max : 1.0));
      write_pgm(out_dir / "phase.pgm", to_pgm16(phase, -std::numbers::pi, std::numbers::pi));
      summary["amplitude_preview_max"] = amp_max;
    }
  }
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
}

RunOutcome cmd_reconstruct(const fs::path& dataset_path, const RunConfig& cfg, const fs::path& out_dir) {
  const DatasetContainer ds = read_dataset(dataset_path);
  RunOutcome run = reconstruct(ds, cfg);
  write_run_outputs(run, cfg, out_dir);
  return run;
}

std::vector<CompareRow> cmd_compare(const fs::path& dataset_path, const std::vector<RunConfig>& configs,
                                    const std::vector<std::string>& labels, const fs::path& out_dir,
                                    std::optional<double> budget_seconds, int threads) {
  if (configs.size() < 2) throw ConfigError("compare needs at least two configs");
  const DatasetContainer ds = read_dataset(dataset_path);
  fs::create_directories(out_dir);

  std::vector<CompareRow> rows(configs.size());
  run_pool(configs.size(), threads, [&](std::size_t i) {
    RunOutcome run = reconstruct(ds, configs[i], budget_seconds);
    if (i < labels.size()) run.label = labels[i];
    write_run_outputs(run, configs[i], out_dir / ("run_" + std::to_string(i)));
    rows[i] = summarize(run);
  });

  std::ofstream csv(out_dir / "compare.csv");
  csv << "label,algorithm,iterations,fidelity,objective,rmse,seconds,status\n";
  for (const auto& r : rows)
    csv << r.label << ',' << r.algorithm << ',' << r.iterations << ',' << csv_number(r.fidelity) << ','
        << csv_number(r.objective) << ',' << csv_optional(r.rmse) << ',' << csv_number(r.seconds) << ",\""
        << r.status << "\"\n";
  return rows;
}

std::vector<SweepRow> cmd_sweep_lambda(const fs::path& dataset_path, const RunConfig& cfg,
                                       const std::vector<double>& lambdas, const fs::path& out_dir, int threads) {
  if (lambdas.empty()) throw ConfigError("sweep-lambda needs at least one lambda");
  const DatasetContainer ds = read_dataset(dataset_path);
  fs::create_directories(out_dir);

  std::vector<SweepRow> rows(lambdas.size());
  run_pool(lambdas.size(), threads, [&](std::size_t i) {
    RunConfig member = cfg;
    member.solver.solver.algorithm = Algorithm::PPTV;
    member.solver.solver.tv.lambda = lambdas[i];
    SweepRow row;
    row.lambda = lambdas[i];
    RunOutcome run;
    if (!(lambdas[i] >= 0.0)) {
      run.error = "lambda must be >= 0";
    } else {
      run = reconstruct(ds, member);
    }
    write_run_outputs(run, member, out_dir / ("lambda_" + std::to_string(i)));
    const CompareRow s = summarize(run);
    row.iterations = s.iterations;
    row.fidelity = s.fidelity;
    row.objective = s.objective;
    row.rmse = s.rmse;
    row.seconds = s.seconds;
    row.status = s.status;
    rows[i] = row;
  });

  std::ofstream csv(out_dir / "sweep.csv");
  csv << "lambda,iterations,fidelity,objective,rmse,seconds,status\n";
  for (const auto& r : rows)
    csv << csv_number(r.lambda) << ',' << r.iterations << ',' << csv_number(r.fidelity) << ','
        << csv_number(r.objective) << ',' << csv_optional(r.rmse) << ',' << csv_number(r.seconds) << ",\""
        << r.status << "\"\n";
  return rows;
}

}  // namespace cptych
