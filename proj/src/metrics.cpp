#include "cptych/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cptych {

AlignedRmse aligned_rmse(const ComplexField& rec, const ComplexField& gt) {
  require_same_shape(rec, gt, "aligned_rmse");
  const double gt_norm = norm2(gt);
  if (gt_norm == 0.0) throw std::invalid_argument("aligned_rmse: ground truth is identically zero");
  const double rec_energy = norm2_squared(rec);
  if (rec_energy == 0.0) return AlignedRmse{1.0, Complex{}, true};

  const Complex c = inner(rec, gt) / rec_energy;
  double err = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) err += std::norm(c * rec[i] - gt[i]);
  return AlignedRmse{std::sqrt(err) / gt_norm, c, false};
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void trace_export(const ConvergenceTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << format_double(r.fidelity) << ',' << format_double(r.objective) << ','
        << (r.rmse ? format_double(*r.rmse) : std::string{}) << ',' << format_double(r.seconds) << '\n';
  }
}

std::string trace_export(const ConvergenceTrace& trace) {
  std::ostringstream os;
  trace_export(trace, os);
  return os.str();
}

ConvergenceTrace trace_import(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw std::runtime_error("trace: missing or wrong header");
  ConvergenceTrace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (line.back() == ',') cols.emplace_back();
    if (cols.size() != 5) throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 5 columns");
    IterationRecord r;
    r.iteration = static_cast<int>(parse_double(cols[0], lineno));
    r.fidelity = parse_double(cols[1], lineno);
    r.objective = parse_double(cols[2], lineno);
    if (!cols[3].empty()) r.rmse = parse_double(cols[3], lineno);
    r.seconds = parse_double(cols[4], lineno);
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace cptych
