#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cptych/field.hpp"

namespace cptych {

struct AlignedRmse {
  double rmse = 1.0;
  Complex scale{};       // global factor applied to the reconstruction
  bool degenerate = false;  // reconstruction had zero norm
};

/// Relative l2 error after removing the global complex factor:
/// c = <rec, gt> / ||rec||^2, rmse = ||c rec - gt|| / ||gt||.
AlignedRmse aligned_rmse(const ComplexField& rec, const ComplexField& gt);

struct IterationRecord {
  int iteration = 0;  // 1-based count of completed outer iterations
  double fidelity = 0.0;
  double objective = 0.0;
  std::optional<double> rmse;
  double seconds = 0.0;  // wall clock since the run started
  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct ConvergenceTrace {
  std::vector<IterationRecord> records;
  /// Diagnostics raised during the run (skipped updates, singular systems).
  std::vector<std::string> flags;

  bool empty() const noexcept { return records.empty(); }
  const IterationRecord& back() const { return records.back(); }
};

struct MetricReport {
  double rmse = 0.0;
  Complex aligned_scalar{};
  double fidelity = 0.0;
  double objective = 0.0;
  double runtime_seconds = 0.0;
};

inline constexpr const char* kTraceHeader = "iteration,fidelity,objective,rmse,seconds";

/// CSV with header kTraceHeader. Reals are written with 17 significant
/// digits so a parse round-trips bit-exactly; a missing rmse is left blank.
void trace_export(const ConvergenceTrace& trace, std::ostream& out);
std::string trace_export(const ConvergenceTrace& trace);
/// Inverse of trace_export. Throws std::runtime_error on malformed input.
ConvergenceTrace trace_import(std::istream& in);

}  // namespace cptych
