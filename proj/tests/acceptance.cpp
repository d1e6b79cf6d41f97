// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// nonzero when any criterion fails.
//
//   acceptance <path-to-cptych-cli> [work-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

#include "cptych/commands.hpp"
#include "cptych/metrics.hpp"
#include "cptych/tv_prox.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cptych;
using testing::fd_mismatch;
using testing::max_abs_diff;
using testing::PlainDualSolver;
using testing::random_field;
using testing::random_real;
using testing::rel_l2;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr double kUnitaryTol = 1e-10;
constexpr double kAdjointTol = 1e-12;
constexpr double kRollTol = 1e-10;
constexpr double kGradientTol = 1e-6;
constexpr double kStepTwoTol = 1e-12;
constexpr double kProxOracleTol = 1e-4;
constexpr double kProxMeanTol = 1e-3;
constexpr double kRmseRatio = 0.5;
constexpr double kTraceTol = 1e-10;
constexpr double kBudgetSeconds = 60.0;
constexpr double kPptvLambda = 3e-3;

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Wraps a criterion so a thrown exception becomes a FAIL line.
void guarded(int id, const char* name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

ComplexField roll(const ComplexField& f, long di, long dj) {
  const long R = static_cast<long>(f.rows()), C = static_cast<long>(f.cols());
  ComplexField out(f.rows(), f.cols());
  for (long i = 0; i < R; ++i)
    for (long j = 0; j < C; ++j) out(i, j) = f(((i + di) % R + R) % R, ((j + dj) % C + C) % C);
  return out;
}

double rel_norm_change(const ComplexField& out, const ComplexField& in) {
  return std::abs(norm2(out) - norm2(in)) / norm2(in);
}

void operator_algebra() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(101);
  OpticalGeometry g;
  g.pitch = 2e-6;
  double unitary = 0.0, adjoint = 0.0, rolled = 0.0;
  for (std::size_t n : {16, 64, 256}) {
    const auto f = random_field(n, n, gen);
    unitary = std::max(unitary, rel_norm_change(fft2(f), f));
    unitary = std::max(unitary, max_abs_diff(ifft2(fft2(f)), f));
    const ScanPosition p{3.7 * g.pitch, -5.2 * g.pitch};
    unitary = std::max(unitary, rel_norm_change(shift(f, p, g), f));
    unitary = std::max(unitary, max_abs_diff(shift(shift(f, p, g), {-p.dx, -p.dy}, g), f));
    unitary = std::max(unitary, rel_norm_change(propagate(f, 300e-6, g), f));
    unitary = std::max(unitary, max_abs_diff(propagate(propagate(f, 300e-6, g), -300e-6, g), f));

    for (int m : {-7, 1, 5}) rolled = std::max(rolled, max_abs_diff(shift(f, {m * g.pitch, 0.0}, g), roll(f, 0, m)));
    rolled = std::max(rolled, max_abs_diff(shift(f, {2 * g.pitch, -3 * g.pitch}, g), roll(f, -3, 2)));

    for (int r : {1, 2, 4}) {
      const auto x = random_real(n, n, gen, -1.0, 1.0);
      const auto y = random_real(n / r, n / r, gen, -1.0, 1.0);
      const auto bx = bin_intensity(x, r);
      const auto uy = upsample_adjoint(y, r);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) lhs += bx[i] * y[i];
      for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * uy[i];
      adjoint = std::max(adjoint, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
  }
  const double secs = seconds_since(t0);
  report(1, "operator algebra", unitary < kUnitaryTol && adjoint < kAdjointTol && rolled < kRollTol && secs < 10.0,
         fmt("unitarity %.2e, bin adjoint %.2e, shift-vs-roll %.2e, %.2f s", unitary, adjoint, rolled, secs));
}

double half_amplitude_misfit(const ComplexField& psi, const RealGrid& frame, int r) {
  const auto b = bin_intensity(abs2(psi), r);
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = std::sqrt(b[i]) - std::sqrt(frame[i]);
    s += d * d;
  }
  return 0.5 * s;
}

void gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(202);
  double fid = 0.0, local = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const int r = 1 << (trial % 3);
    const auto psi = random_field(8, 8, gen);
    const auto frame = random_real(8 / r, 8 / r, gen, 0.1, 2.0 * r * r);
    const auto grad = fidelity_gradient(psi, frame, r);
    fid = std::max(fid, fd_mismatch(psi, grad, 2.0, [&](const ComplexField& x) { return half_amplitude_misfit(x, frame, r); }));

    // Local error E(u, t) = || target - u t ||^2 and its update directions.
    const auto u = random_field(8, 8, gen);
    ComplexField t(8, 8);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    for (auto& v : t) v = std::polar(0.3 + 0.7 * un(gen), 6.283185307179586 * un(gen));
    const CodedSurface cs(t);
    const auto target = random_field(8, 8, gen);
    const double a1 = 0.8, a2 = 1.1;
    const auto d = epie_update(target, u, cs, a1, a2);
    double cs_max = 0.0, u_max = 0.0;
    for (const auto& v : t) cs_max = std::max(cs_max, std::norm(v));
    for (const auto& v : u) u_max = std::max(u_max, std::norm(v));
    ComplexField gu(8, 8), gt(8, 8);
    for (std::size_t i = 0; i < 64; ++i) {
      gu[i] = -d.object_shifted[i] * (cs_max / a1);
      gt[i] = -d.cs[i] * (u_max / a2);
    }
    auto E = [&](const ComplexField& uu, const ComplexField& tt) {
      double s = 0.0;
      for (std::size_t i = 0; i < uu.size(); ++i) s += std::norm(target[i] - uu[i] * tt[i]);
      return s;
    };
    local = std::max(local, fd_mismatch(u, gu, 2.0, [&](const ComplexField& x) { return E(x, t); }));
    local = std::max(local, fd_mismatch(t, gt, 2.0, [&](const ComplexField& x) { return E(u, x); }));
  }
  const double secs = seconds_since(t0);
  report(2, "gradient correctness", fid < kGradientTol && local < kGradientTol && secs < 30.0,
         fmt("fidelity rel err %.2e, local error rel err %.2e, %.2f s", fid, local, secs));
}

void step_two_identity() {
  std::mt19937_64 gen(303);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int r = 1 << (trial % 3);
    const auto psi = random_field(16, 16, gen);
    const auto frame = random_real(16 / r, 16 / r, gen, 0.0, 3.0 * r * r);
    const auto proj = modulus_project(psi, frame, r);
    auto step = fidelity_gradient(psi, frame, r);
    for (std::size_t i = 0; i < step.size(); ++i) step[i] = psi[i] - 2.0 * step[i];
    worst = std::max(worst, max_abs_diff(proj, step));
  }
  report(3, "modulus projection is a size-2 gradient step", worst < kStepTwoTol,
         fmt("max error %.2e over 100 instances", worst));
}

void tv_prox_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(404);
  double oracle = 0.0;
  for (double lambda : {0.05, 0.2}) {
    const auto psi = random_field(8, 8, gen, 0.5);
    TVProxConfig cfg;
    cfg.lambda = lambda;
    cfg.sub_iters = 2000;
    const auto fast = tv_prox(psi, cfg);
    const auto slow = PlainDualSolver{8, 8}.solve(psi, lambda, 1.0 / 16.0, 100000);
    oracle = std::max(oracle, rel_l2(fast, slow));
  }

  const auto psi = random_field(8, 8, gen);
  TVProxConfig zero;
  zero.lambda = 0.0;
  const bool identity = tv_prox(psi, zero) == psi;

  TVProxConfig big;
  big.lambda = 1e3;
  big.sub_iters = 2000;
  const auto flat = tv_prox(psi, big);
  Complex mean{};
  for (const auto& v : psi) mean += v;
  mean /= static_cast<double>(psi.size());
  double to_mean = 0.0;
  for (const auto& v : flat) to_mean = std::max(to_mean, std::abs(v - mean));

  const double secs = seconds_since(t0);
  report(4, "TV prox oracle equivalence", oracle < kProxOracleTol && identity && to_mean < kProxMeanTol && secs < 60.0,
         fmt("oracle rel err %.2e, large-lambda dev %.2e, %.2f s", oracle, to_mean, secs) +
             (identity ? ", lambda=0 identity exact" : ", lambda=0 identity BROKEN"));
}

struct SolverRuns {
  RunOutcome pptv, epie, lsq;
};

RunConfig scaled_config(Algorithm alg) {
  RunConfig cfg;  // 256 x 256, r = 4, K = 8, 0.2 background, street/peppers stand-ins
  cfg.output.previews = false;
  cfg.solver.solver.algorithm = alg;
  if (alg == Algorithm::PPTV) {
    cfg.solver.solver.tv.lambda = kPptvLambda;
    cfg.solver.solver.nesterov = true;
  }
  return cfg;
}

double final_rmse(const RunOutcome& r) { return r.ok() ? *r.state->trace.back().rmse : INFINITY; }

std::string run_error(const SolverRuns& runs) {
  for (const RunOutcome* r : {&runs.pptv, &runs.epie, &runs.lsq})
    if (!r->ok()) return r->label + ": " + r->error;
  return {};
}

SolverRuns run_all(const DatasetContainer& ds, const std::function<void(RunConfig&)>& tweak) {
  SolverRuns runs;
  RunOutcome* slots[] = {&runs.pptv, &runs.epie, &runs.lsq};
  const Algorithm algs[] = {Algorithm::PPTV, Algorithm::ePIE, Algorithm::LSQML};
  for (int i = 0; i < 3; ++i) {
    RunConfig cfg = scaled_config(algs[i]);
    tweak(cfg);
    *slots[i] = reconstruct(ds, cfg, kBudgetSeconds);
  }
  return runs;
}

SolverRuns known_surface_runs;

void scaled_known_surface() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = build_dataset(scaled_config(Algorithm::PPTV));
  known_surface_runs = run_all(ds, [](RunConfig&) {});
  const auto& runs = known_surface_runs;
  if (const auto err = run_error(runs); !err.empty()) {
    report(5, "scaled known-surface experiment", false, err);
    return;
  }
  const double p = final_rmse(runs.pptv), e = final_rmse(runs.epie), l = final_rmse(runs.lsq);
  const double secs = seconds_since(t0);
  report(5, "scaled known-surface experiment", p <= kRmseRatio * std::min(e, l) && secs < 300.0,
         fmt("rmse pptv %.4f, epie %.4f, lsq-ml %.4f, %.0f s", p, e, l, secs));
}

void scaled_perturbed_surface() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = build_dataset(scaled_config(Algorithm::PPTV));
  const auto runs = run_all(ds, [](RunConfig& cfg) {
    cfg.solver.cs_start_rule = CsStartRule::Half;
    cfg.solver.surface_perturbation = PerturbationConfig{0.1, 0.3, 5};
  });
  if (const auto err = run_error(runs); !err.empty()) {
    report(6, "scaled perturbed-surface experiment", false, err);
    return;
  }
  const auto& st = *runs.pptv.state;
  const int start = st.iteration / 2;
  double at_start = INFINITY;
  for (const auto& rec : st.trace.records)
    if (rec.iteration == start) at_start = *rec.rmse;
  const double p = final_rmse(runs.pptv), e = final_rmse(runs.epie), l = final_rmse(runs.lsq);
  const double secs = seconds_since(t0);
  const bool turn = p < at_start;
  const bool beats = p < e && p < l;
  std::string detail = fmt("(a) rmse at surface start (iter %.0f) %.4f -> final %.4f; ", start, at_start, p);
  detail += fmt("(b) pptv %.4f, epie %.4f, lsq-ml %.4f; ", p, e, l) + fmt("%.0f s", secs);
  report(6, "scaled perturbed-surface experiment", turn && beats && secs < 300.0, detail);
}

void objective_trend() {
  const auto& runs = known_surface_runs;
  if (const auto err = run_error(runs); !err.empty()) {
    report(7, "objective trend", false, err);
    return;
  }
  const auto& pt = runs.pptv.state->trace.records;
  const auto& et = runs.epie.state->trace.records;
  const bool pptv_down = pt.back().objective < pt.front().objective;
  const bool epie_fid_down = et.back().fidelity < et.front().fidelity;
  // ePIE's objective, evaluated with PPTV's weight, stays above PPTV's.
  const double epie_obj = objective_value(runs.epie.state->object, runs.epie.state->cs,
                                          build_dataset(scaled_config(Algorithm::PPTV)).measurements, kPptvLambda);
  const bool plateau = epie_obj > pt.back().objective;
  std::string detail = fmt("pptv objective %.4g -> %.4g; ", pt.front().objective, pt.back().objective);
  detail += fmt("epie fidelity %.4g -> %.4g; ", et.front().fidelity, et.back().fidelity);
  detail += fmt("epie objective %.4g vs pptv %.4g", epie_obj, pt.back().objective);
  report(7, "objective trend", pptv_down && epie_fid_down && plateau, detail);
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

ConvergenceTrace load_trace(const fs::path& p) {
  std::ifstream in(p);
  return trace_import(in);
}

void write_config(const fs::path& p, const std::string& algorithm, double lambda) {
  std::ofstream(p) << R"({"scenario": {"rows": 64, "cols": 64, "num_positions": 6, "seed": 21},
 "geometry": {"pitch": 2e-6, "d1": 200e-6, "d2": 200e-6, "sr_ratio": 2},
 "solver": {"algorithm": ")" << algorithm << R"(", "outer_iters": 20, "cs_update_start": 10, "seed": 4,
   "init_surface": {"source": "container", "perturb": {"sigma_amp": 0.05, "sigma_ang": 0.2, "seed": 8}},
   "tv": {"lambda": )" << lambda << R"(}},
 "output": {"previews": false}})";
}

void reduction_identity(const std::string& cli, const fs::path& work) {
  const auto dir = work / "reduction";
  fs::create_directories(dir);
  write_config(dir / "pptv.json", "pptv", 0.0);
  write_config(dir / "epie.json", "epie", 0.0);
  const std::string d = (dir / "data.cds").string();
  int rc = run_cli(cli, "simulate --config " + (dir / "pptv.json").string() + " --out " + d);
  rc |= run_cli(cli, "reconstruct " + d + " --config " + (dir / "pptv.json").string() + " --out " + (dir / "pptv").string());
  rc |= run_cli(cli, "reconstruct " + d + " --config " + (dir / "epie.json").string() + " --out " + (dir / "epie").string());
  if (rc != 0) {
    report(8, "lambda = 0 reduces to ePIE through the CLI", false, "CLI returned nonzero");
    return;
  }
  const auto a = load_trace(dir / "pptv" / "trace.csv");
  const auto b = load_trace(dir / "epie" / "trace.csv");
  double worst = 0.0;
  bool shape = a.records.size() == b.records.size() && !a.records.empty();
  for (std::size_t i = 0; shape && i < a.records.size(); ++i) {
    const auto &x = a.records[i], &y = b.records[i];
    shape = x.iteration == y.iteration && x.rmse.has_value() == y.rmse.has_value();
    worst = std::max({worst, std::abs(x.fidelity - y.fidelity), std::abs(x.objective - y.objective)});
    if (shape && x.rmse) worst = std::max(worst, std::abs(*x.rmse - *y.rmse));
  }
  const double obj_diff = max_abs_diff(read_complex_array(dir / "pptv" / "object.cca"),
                                       read_complex_array(dir / "epie" / "object.cca"));
  report(8, "lambda = 0 reduces to ePIE through the CLI", shape && worst < kTraceTol && obj_diff < kTraceTol,
         fmt("%.0f iterations, max trace diff %.2e, max object diff %.2e", static_cast<double>(a.records.size()), worst,
             obj_diff));
}

void determinism_and_format(const std::string& cli, const fs::path& work) {
  const auto dir = work / "determinism";
  fs::create_directories(dir);
  write_config(dir / "c.json", "pptv", 1e-3);
  const auto a = dir / "a.cds", b = dir / "b.cds";
  int rc = run_cli(cli, "simulate --config " + (dir / "c.json").string() + " --seed 13 --out " + a.string());
  rc |= run_cli(cli, "simulate --config " + (dir / "c.json").string() + " --seed 13 --out " + b.string());
  const std::string bytes = slurp(a);
  const bool identical = rc == 0 && !bytes.empty() && bytes == slurp(b);

  const auto ds = read_dataset(a);
  std::ostringstream again;
  write_dataset(again, ds);
  const bool stream_exact = again.str() == bytes;
  std::istringstream in(again.str());
  const auto back = read_dataset(in);
  bool fields_exact = back.measurements.size() == ds.measurements.size() && back.ground_truth == ds.ground_truth &&
                      back.coded_surface.has_value() &&
                      back.coded_surface->transmittance() == ds.coded_surface->transmittance() &&
                      back.measurements.positions == ds.measurements.positions && back.seed == 13;
  for (std::size_t k = 0; fields_exact && k < ds.measurements.size(); ++k)
    fields_exact = back.measurements.frames[k] == ds.measurements.frames[k];
  report(9, "determinism and container format", identical && stream_exact && fields_exact,
         std::string("simulate byte-identical ") + (identical ? "yes" : "no") + ", re-serialization exact " +
             (stream_exact ? "yes" : "no") + ", round trip bit-exact " + (fields_exact ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <cptych-cli> [work-dir]\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "cptych_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  guarded(1, "operator algebra", operator_algebra);
  guarded(2, "gradient correctness", gradients);
  guarded(3, "modulus projection is a size-2 gradient step", step_two_identity);
  guarded(4, "TV prox oracle equivalence", tv_prox_oracle);
  guarded(5, "scaled known-surface experiment", scaled_known_surface);
  guarded(6, "scaled perturbed-surface experiment", scaled_perturbed_surface);
  guarded(7, "objective trend", objective_trend);
  guarded(8, "lambda = 0 reduces to ePIE through the CLI", [&] { reduction_identity(cli, work); });
  guarded(9, "determinism and container format", [&] { determinism_and_format(cli, work); });

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
