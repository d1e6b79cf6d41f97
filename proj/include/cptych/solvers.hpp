#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cptych/field.hpp"
#include "cptych/forward.hpp"
#include "cptych/metrics.hpp"
#include "cptych/tv_prox.hpp"

namespace cptych {

enum class Algorithm { ePIE, LSQML, PPTV };

std::string_view to_string(Algorithm a) noexcept;
/// Accepts "epie", "lsq-ml", "pptv" (case-insensitive). Throws std::invalid_argument.
Algorithm parse_algorithm(std::string_view name);

/// How the per-position corrections inside one mini-batch are combined.
enum class BatchMode {
  Sequential,  // classic ePIE sweep, each k sees the previous k's update
  Average,     // every k is computed from the same iterate, then averaged
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::PPTV;
  int outer_iters = 30;
  /// Coded-surface updates run in iterations j > cs_update_start (1-based),
  /// so cs_update_start >= outer_iters keeps the surface fixed.
  int cs_update_start = std::numeric_limits<int>::max();
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  /// LSQ-ML regularizer; unset means 1e-8 x mean frame energy.
  std::optional<double> lsq_alpha;
  TVProxConfig tv;
  /// 0 selects the default: K when K <= 8, else 8.
  int batch_size = 0;
  bool nesterov = false;
  std::uint64_t seed = 0;
  BatchMode batch_mode = BatchMode::Sequential;
  /// Stop after this much wall-clock time even if outer_iters is not reached.
  std::optional<double> time_budget_seconds;
  /// Sensor pixels with binned energy <= guard * mean binned energy are left
  /// untouched by the modulus projection.
  double division_guard = 1e-12;

  void validate(std::size_t num_measurements) const;
  int effective_batch_size(std::size_t num_measurements) const;
};

struct ReconstructionState {
  ComplexField object;
  CodedSurface cs;
  int iteration = 0;
  ConvergenceTrace trace;
};

/// Raised when an iterate stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int last_good_iteration)
      : std::runtime_error(what), last_good_(last_good_iteration) {}
  int last_good_iteration() const noexcept { return last_good_; }

 private:
  int last_good_;
};

/// (1/2K) sum_k || sqrt(S|Psi_s^k|^2) - sqrt(I_k) ||^2 for the given estimate.
double fidelity_error(const ComplexField& object, const CodedSurface& cs, const MeasurementSet& m);
double fidelity_error(const ReconstructionState& state, const MeasurementSet& m);

/// fidelity_error + lambda * TV(object).
double objective_value(const ComplexField& object, const CodedSurface& cs, const MeasurementSet& m, double lambda);
double objective_value(const ReconstructionState& state, const MeasurementSet& m, double lambda);

/// Wirtinger gradient (w.r.t. conj(psi_s)) of 0.5 || sqrt(S|psi_s|^2) - sqrt(frame) ||^2:
///   0.5 psi_s * S^T(1 - sqrt(frame) / sqrt(S|psi_s|^2)).
/// Guarded sensor pixels contribute zero gradient.
ComplexField fidelity_gradient(const ComplexField& psi_s, const RealGrid& frame, int r, double guard = 1e-12);

/// Modulus constraint: psi_s * S^T(sqrt(frame) / sqrt(S|psi_s|^2)), i.e. one
/// gradient step of size 2. Guarded pixels keep their value.
ComplexField modulus_project(const ComplexField& psi_s, const RealGrid& frame, int r, double guard = 1e-12);

struct EpieDeltas {
  ComplexField object_shifted;  // still in the shifted frame; caller applies H_k^H
  ComplexField cs;
  bool object_skipped = false;  // max |cs|^2 == 0
  bool cs_skipped = false;      // max |psi_us|^2 == 0
};

/// R = psi_cs_corrected - psi_us * cs;
/// object: (alpha1 / max|cs|^2) conj(cs) R, surface: (alpha2 / max|psi_us|^2) conj(psi_us) R.
EpieDeltas epie_update(const ComplexField& psi_cs_corrected, const ComplexField& psi_us, const CodedSurface& cs,
                       double alpha1, double alpha2);

struct LsqSteps {
  double beta_u = 0.0;
  double beta_cs = 0.0;
  bool singular = false;
};

/// Joint real step sizes along (dir_obj, dir_cs) minimising the linearised
/// error || residual - beta_u dir_obj*cs - beta_cs dir_cs*psi_us ||^2
/// + alpha (beta_u^2 + beta_cs^2), solved in closed form.
LsqSteps lsq_step_sizes(const ComplexField& residual, const ComplexField& dir_obj, const ComplexField& dir_cs,
                        const ComplexField& psi_us, const CodedSurface& cs, double alpha);

/// Runs the selected engine. Deterministic for a fixed config unless a time
/// budget cuts the run short. Throws DivergenceError on non-finite iterates.
ReconstructionState run_reconstruction(const MeasurementSet& measurements, const ComplexField& init_object,
                                       const CodedSurface& init_cs, const SolverConfig& cfg,
                                       const std::optional<ComplexField>& ground_truth = std::nullopt);

/// Times a short probe run and returns how many outer iterations of `cfg`
/// fit into `budget_seconds` (at least 1).
int iterations_for_budget(const MeasurementSet& measurements, const ComplexField& init_object,
                          const CodedSurface& init_cs, const SolverConfig& cfg, double budget_seconds,
                          int probe_iters = 2);

/// Constant object whose energy matches the mean frame energy through `cs`.
ComplexField flat_initial_object(const MeasurementSet& measurements, const CodedSurface& cs);

}  // namespace cptych
