#include "cptych/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <set>

#include "cptych/propagator.hpp"
#include "cptych/random.hpp"

namespace cptych {

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::ePIE: return "epie";
    case Algorithm::LSQML: return "lsq-ml";
    case Algorithm::PPTV: return "pptv";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "epie") return Algorithm::ePIE;
  if (s == "lsq-ml" || s == "lsqml" || s == "lsq") return Algorithm::LSQML;
  if (s == "pptv") return Algorithm::PPTV;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "' (expected epie, lsq-ml or pptv)");
}

void SolverConfig::validate(std::size_t num_measurements) const {
  if (outer_iters < 1) throw std::invalid_argument("outer_iters must be >= 1");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) throw std::invalid_argument("alpha1 and alpha2 must be > 0");
  if (lsq_alpha && !(*lsq_alpha > 0.0)) throw std::invalid_argument("lsq_alpha must be > 0");
  if (batch_size < 0) throw std::invalid_argument("batch_size must be >= 1 (or 0 for the default)");
  if (batch_size > 0 && static_cast<std::size_t>(batch_size) > num_measurements)
    throw std::invalid_argument("batch_size " + std::to_string(batch_size) + " exceeds the number of measurements " +
                                std::to_string(num_measurements));
  if (time_budget_seconds && !(*time_budget_seconds > 0.0)) throw std::invalid_argument("time budget must be > 0");
  if (!(division_guard >= 0.0)) throw std::invalid_argument("division_guard must be >= 0");
  tv.validate();
}

int SolverConfig::effective_batch_size(std::size_t num_measurements) const {
  if (batch_size > 0) return batch_size;
  return num_measurements <= 8 ? static_cast<int>(num_measurements) : 8;
}

namespace {

// Shared sensor-plane bookkeeping for the gradient and the projection.
struct SensorRatio {
  RealGrid ratio;    // sqrt(frame / binned), per sensor pixel
  std::vector<bool> guarded;
};

SensorRatio sensor_ratio(const ComplexField& psi_s, const RealGrid& frame, int r, double guard) {
  RealGrid binned = bin_intensity(abs2(psi_s), r);
  if (!binned.same_shape(frame))
    throw DimensionError("frame is " + std::to_string(frame.rows()) + "x" + std::to_string(frame.cols()) +
                         " but the binned field is " + std::to_string(binned.rows()) + "x" +
                         std::to_string(binned.cols()));
  double mean = 0.0;
  for (double v : binned) mean += v;
  mean /= static_cast<double>(binned.size());
  const double threshold = guard * mean;

  SensorRatio out{RealGrid(frame.rows(), frame.cols()), std::vector<bool>(frame.size(), false)};
  for (std::size_t i = 0; i < binned.size(); ++i) {
    if (binned[i] <= threshold) {
      out.ratio[i] = 1.0;
      out.guarded[i] = true;
    } else {
      out.ratio[i] = std::sqrt(frame[i]) / std::sqrt(binned[i]);
    }
  }
  return out;
}

double max_abs2(const ComplexField& f) {
  double m = 0.0;
  for (const auto& v : f) m = std::max(m, std::norm(v));
  return m;
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void add_flag(ConvergenceTrace& trace, std::set<std::string>& seen, const std::string& kind, int iteration) {
  if (seen.insert(kind).second) trace.flags.push_back("iteration " + std::to_string(iteration) + ": " + kind);
}

// Per-dataset operators reused across iterations.
struct Operators {
  Propagator to_cs;
  Propagator to_sensor;
  std::vector<PhaseRamp> shifts;

  Operators(const MeasurementSet& m, std::size_t rows, std::size_t cols)
      : to_cs(rows, cols, m.geom.d1, m.geom), to_sensor(rows, cols, m.geom.d2, m.geom) {
    shifts.reserve(m.size());
    for (const auto& p : m.positions) shifts.emplace_back(rows, cols, p, m.geom);
  }
};

void check_consistency(const MeasurementSet& m, const ComplexField& object, const CodedSurface& cs) {
  m.validate();
  require_same_shape(object, cs.transmittance(), "object vs coded surface");
  const auto r = static_cast<std::size_t>(m.geom.sr_ratio);
  if (object.rows() != m.frames.front().rows() * r || object.cols() != m.frames.front().cols() * r)
    throw DimensionError("object " + std::to_string(object.rows()) + "x" + std::to_string(object.cols()) +
                         " does not match frames " + std::to_string(m.frames.front().rows()) + "x" +
                         std::to_string(m.frames.front().cols()) + " at sr_ratio " + std::to_string(r));
}

double fidelity_with(const Operators& ops, const ComplexField& object, const CodedSurface& cs,
                     const MeasurementSet& m) {
  const ComplexField psi_u = ops.to_cs.apply(object);
  const auto& t = cs.transmittance();
  double total = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    ComplexField u = ops.shifts[k].apply(psi_u);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= t[i];
    const RealGrid binned = bin_intensity(abs2(ops.to_sensor.apply(u)), m.geom.sr_ratio);
    const RealGrid& frame = m.frames[k];
    for (std::size_t i = 0; i < binned.size(); ++i) {
      const double d = std::sqrt(binned[i]) - std::sqrt(frame[i]);
      total += d * d;
    }
  }
  return total / (2.0 * static_cast<double>(m.size()));
}

}  // namespace

double fidelity_error(const ComplexField& object, const CodedSurface& cs, const MeasurementSet& m) {
  check_consistency(m, object, cs);
  return fidelity_with(Operators(m, object.rows(), object.cols()), object, cs, m);
}

double fidelity_error(const ReconstructionState& state, const MeasurementSet& m) {
  return fidelity_error(state.object, state.cs, m);
}

double objective_value(const ComplexField& object, const CodedSurface& cs, const MeasurementSet& m, double lambda) {
  return fidelity_error(object, cs, m) + lambda * tv_seminorm(object);
}

double objective_value(const ReconstructionState& state, const MeasurementSet& m, double lambda) {
  return objective_value(state.object, state.cs, m, lambda);
}

ComplexField fidelity_gradient(const ComplexField& psi_s, const RealGrid& frame, int r, double guard) {
  const SensorRatio sr = sensor_ratio(psi_s, frame, r, guard);
  RealGrid factor(frame.rows(), frame.cols());
  for (std::size_t i = 0; i < factor.size(); ++i) factor[i] = sr.guarded[i] ? 0.0 : 1.0 - sr.ratio[i];
  const RealGrid up = upsample_adjoint(factor, r);
  ComplexField g(psi_s.rows(), psi_s.cols());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.5 * psi_s[i] * up[i];
  return g;
}

ComplexField modulus_project(const ComplexField& psi_s, const RealGrid& frame, int r, double guard) {
  const SensorRatio sr = sensor_ratio(psi_s, frame, r, guard);
  const RealGrid up = upsample_adjoint(sr.ratio, r);
  ComplexField out(psi_s.rows(), psi_s.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = psi_s[i] * up[i];
  return out;
}

EpieDeltas epie_update(const ComplexField& psi_cs_corrected, const ComplexField& psi_us, const CodedSurface& cs,
                       double alpha1, double alpha2) {
  const auto& t = cs.transmittance();
  require_same_shape(psi_cs_corrected, psi_us, "epie_update");
  require_same_shape(psi_us, t, "epie_update");

  const double cs_max = max_abs2(t);
  const double obj_max = max_abs2(psi_us);
  EpieDeltas d{ComplexField(t.rows(), t.cols()), ComplexField(t.rows(), t.cols()), cs_max == 0.0, obj_max == 0.0};
  const double step_obj = d.object_skipped ? 0.0 : alpha1 / cs_max;
  const double step_cs = d.cs_skipped ? 0.0 : alpha2 / obj_max;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Complex residual = psi_cs_corrected[i] - psi_us[i] * t[i];
    if (!d.object_skipped) d.object_shifted[i] = step_obj * std::conj(t[i]) * residual;
    if (!d.cs_skipped) d.cs[i] = step_cs * std::conj(psi_us[i]) * residual;
  }
  return d;
}

LsqSteps lsq_step_sizes(const ComplexField& residual, const ComplexField& dir_obj, const ComplexField& dir_cs,
                        const ComplexField& psi_us, const CodedSurface& cs, double alpha) {
  const auto& t = cs.transmittance();
  require_same_shape(residual, dir_obj, "lsq_step_sizes");
  require_same_shape(residual, dir_cs, "lsq_step_sizes");
  require_same_shape(residual, psi_us, "lsq_step_sizes");
  require_same_shape(residual, t, "lsq_step_sizes");
  if (!(alpha > 0.0)) throw std::invalid_argument("lsq_step_sizes: alpha must be > 0");

  double aa = 0.0, bb = 0.0, ab = 0.0, ar = 0.0, br = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Complex a = dir_obj[i] * t[i];
    const Complex b = dir_cs[i] * psi_us[i];
    aa += std::norm(a);
    bb += std::norm(b);
    ab += (std::conj(a) * b).real();
    ar += (std::conj(a) * residual[i]).real();
    br += (std::conj(b) * residual[i]).real();
  }
  const double m11 = aa + alpha, m22 = bb + alpha;
  const double det = m11 * m22 - ab * ab;
  if (!(det > 0.0) || !std::isfinite(det)) return LsqSteps{0.0, 0.0, true};
  LsqSteps s{(m22 * ar - ab * br) / det, (m11 * br - ab * ar) / det, false};
  if (!std::isfinite(s.beta_u) || !std::isfinite(s.beta_cs)) return LsqSteps{0.0, 0.0, true};
  return s;
}

ComplexField flat_initial_object(const MeasurementSet& measurements, const CodedSurface& cs) {
  const double cs_energy = norm2_squared(cs.transmittance());
  const double level = cs_energy > 0.0 ? std::sqrt(measurements.mean_frame_energy() / cs_energy) : 1.0;
  return ComplexField(cs.rows(), cs.cols(), Complex{level, 0.0});
}

ReconstructionState run_reconstruction(const MeasurementSet& m, const ComplexField& init_object,
                                       const CodedSurface& init_cs, const SolverConfig& cfg,
                                       const std::optional<ComplexField>& ground_truth) {
  check_consistency(m, init_object, init_cs);
  cfg.validate(m.size());
  if (ground_truth) require_same_shape(*ground_truth, init_object, "ground truth");

  const Clock clock;
  const std::size_t rows = init_object.rows(), cols = init_object.cols();
  const Operators ops(m, rows, cols);
  const int r = m.geom.sr_ratio;
  const std::size_t batch = static_cast<std::size_t>(cfg.effective_batch_size(m.size()));
  const double lsq_alpha = cfg.lsq_alpha.value_or(1e-8 * m.mean_frame_energy());
  const double lsq_alpha_safe = lsq_alpha > 0.0 ? lsq_alpha : 1e-300;

  ReconstructionState state{init_object, init_cs, 0, {}};
  ComplexField surface = init_cs.transmittance();
  ComplexField lookahead = init_object;  // Nesterov point the next iteration starts from
  std::set<std::string> seen_flags;

  for (int j = 1; j <= cfg.outer_iters; ++j) {
    const bool cs_active = j > cfg.cs_update_start;
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(j));
    const auto order = shuffled_indices(m.size(), rng);

    ComplexField object = lookahead;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      ComplexField psi_u = ops.to_cs.apply(object);
      ComplexField obj_acc, cs_acc;
      if (cfg.batch_mode == BatchMode::Average) {
        obj_acc = ComplexField(rows, cols);
        cs_acc = ComplexField(rows, cols);
      }

      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t k = order[b];
        const CodedSurface current_cs(surface);
        const ComplexField psi_us = ops.shifts[k].apply(psi_u);
        ComplexField psi_cs = psi_us;
        for (std::size_t i = 0; i < psi_cs.size(); ++i) psi_cs[i] *= surface[i];

        // Step 1: sensor plane.
        const ComplexField psi_s =
            modulus_project(ops.to_sensor.apply(psi_cs), m.frames[k], r, cfg.division_guard);
        const ComplexField corrected = ops.to_sensor.apply_adjoint(psi_s);

        // Step 2: coded-surface plane.
        ComplexField delta_obj, delta_cs;
        if (cfg.algorithm == Algorithm::LSQML) {
          ComplexField residual(rows, cols), dir_obj(rows, cols), dir_cs(rows, cols);
          for (std::size_t i = 0; i < residual.size(); ++i) {
            residual[i] = corrected[i] - psi_cs[i];
            dir_obj[i] = std::conj(surface[i]) * residual[i];
            if (cs_active) dir_cs[i] = std::conj(psi_us[i]) * residual[i];
          }
          const LsqSteps steps = lsq_step_sizes(residual, dir_obj, dir_cs, psi_us, current_cs, lsq_alpha_safe);
          if (steps.singular) add_flag(state.trace, seen_flags, "singular LSQ step system, update skipped", j);
          for (std::size_t i = 0; i < residual.size(); ++i) {
            dir_obj[i] *= steps.beta_u;
            dir_cs[i] *= steps.beta_cs;
          }
          delta_obj = std::move(dir_obj);
          delta_cs = std::move(dir_cs);
        } else {
          EpieDeltas d = epie_update(corrected, psi_us, current_cs, cfg.alpha1, cfg.alpha2);
          if (d.object_skipped) add_flag(state.trace, seen_flags, "object update skipped (zero coded surface)", j);
          if (d.cs_skipped && cs_active)
            add_flag(state.trace, seen_flags, "coded-surface update skipped (zero object wave)", j);
          delta_obj = std::move(d.object_shifted);
          delta_cs = std::move(d.cs);
        }

        const ComplexField delta_u = ops.shifts[k].apply_adjoint(delta_obj);
        if (cfg.batch_mode == BatchMode::Sequential) {
          for (std::size_t i = 0; i < psi_u.size(); ++i) psi_u[i] += delta_u[i];
          if (cs_active) {
            for (std::size_t i = 0; i < surface.size(); ++i) surface[i] += delta_cs[i];
            clamp_unit_modulus(surface);
          }
        } else {
          for (std::size_t i = 0; i < psi_u.size(); ++i) obj_acc[i] += delta_u[i];
          if (cs_active)
            for (std::size_t i = 0; i < surface.size(); ++i) cs_acc[i] += delta_cs[i];
        }
      }

      if (cfg.batch_mode == BatchMode::Average) {
        const double inv = 1.0 / static_cast<double>(stop - start);
        for (std::size_t i = 0; i < psi_u.size(); ++i) psi_u[i] += inv * obj_acc[i];
        if (cs_active) {
          for (std::size_t i = 0; i < surface.size(); ++i) surface[i] += inv * cs_acc[i];
          clamp_unit_modulus(surface);
        }
      }

      // Step 3: object plane.
      ComplexField psi_o = ops.to_cs.apply_adjoint(psi_u);
      object = cfg.algorithm == Algorithm::PPTV ? tv_prox(psi_o, cfg.tv) : std::move(psi_o);
    }

    if (cfg.nesterov) {
      const double eps = static_cast<double>(j) / (j + 3.0);
      lookahead = object;
      for (std::size_t i = 0; i < lookahead.size(); ++i) lookahead[i] += eps * (object[i] - state.object[i]);
    } else {
      lookahead = object;
    }

    if (!all_finite(object) || !all_finite(lookahead) || !all_finite(surface))
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(j) + " (" +
                                std::string(to_string(cfg.algorithm)) + ")",
                            j - 1);

    state.object = std::move(object);
    state.cs = CodedSurface(surface);
    state.iteration = j;

    IterationRecord rec;
    rec.iteration = j;
    rec.fidelity = fidelity_with(ops, state.object, state.cs, m);
    rec.objective = rec.fidelity + cfg.tv.lambda * tv_seminorm(state.object);
    if (ground_truth) rec.rmse = aligned_rmse(state.object, *ground_truth).rmse;
    rec.seconds = clock.seconds();
    state.trace.records.push_back(rec);

    if (cfg.time_budget_seconds && rec.seconds >= *cfg.time_budget_seconds) break;
  }
  return state;
}

int iterations_for_budget(const MeasurementSet& measurements, const ComplexField& init_object,
                          const CodedSurface& init_cs, const SolverConfig& cfg, double budget_seconds,
                          int probe_iters) {
  if (!(budget_seconds > 0.0)) throw std::invalid_argument("budget must be > 0");
  SolverConfig probe = cfg;
  probe.outer_iters = std::max(1, probe_iters);
  probe.time_budget_seconds.reset();
  const Clock clock;
  run_reconstruction(measurements, init_object, init_cs, probe, init_object);
  const double per_iter = clock.seconds() / probe.outer_iters;
  if (!(per_iter > 0.0)) return cfg.outer_iters;
  return std::max(1, static_cast<int>(budget_seconds / per_iter));
}

}  // namespace cptych
