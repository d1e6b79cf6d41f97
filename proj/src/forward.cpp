#include "cptych/forward.hpp"

#include <cmath>

#include "cptych/propagator.hpp"
#include "cptych/random.hpp"

namespace cptych {

void clamp_unit_modulus(ComplexField& f) {
  for (auto& v : f) {
    const double m = std::abs(v);
    if (m > 1.0) v /= m;
  }
}

CodedSurface::CodedSurface(ComplexField transmittance) : t_(std::move(transmittance)) {
  for (const auto& v : t_) {
    if (!(std::abs(v) <= 1.0 + kModulusTolerance))
      throw std::invalid_argument("coded surface transmittance modulus exceeds 1");
  }
}

CodedSurface CodedSurface::clamped(ComplexField transmittance) {
  clamp_unit_modulus(transmittance);
  return CodedSurface(std::move(transmittance));
}

CodedSurface CodedSurface::ones(std::size_t rows, std::size_t cols) {
  return CodedSurface(ComplexField(rows, cols, Complex{1.0, 0.0}));
}

void MeasurementSet::validate() const {
  if (positions.empty()) throw std::invalid_argument("measurement set is empty");
  if (positions.size() != frames.size())
    throw DimensionError("measurement set has " + std::to_string(positions.size()) + " positions but " +
                         std::to_string(frames.size()) + " frames");
  for (const auto& f : frames) {
    if (!f.same_shape(frames.front())) throw DimensionError("frames do not share dimensions");
    for (double v : f)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("frame entries must be finite and >= 0");
  }
  geom.validate();
}

double MeasurementSet::mean_frame_energy() const {
  if (frames.empty()) return 0.0;
  double total = 0.0;
  for (const auto& f : frames)
    for (double v : f) total += v;
  return total / static_cast<double>(frames.size());
}

ComplexField exit_wave(const ComplexField& object, const CodedSurface& cs, ScanPosition pos,
                       const OpticalGeometry& geom) {
  require_same_shape(object, cs.transmittance(), "exit_wave");
  ComplexField u = shift(propagate(object, geom.d1, geom), pos, geom);
  const auto& t = cs.transmittance();
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= t[i];
  return u;
}

RealGrid forward_intensity(const ComplexField& object, const CodedSurface& cs, ScanPosition pos,
                           const OpticalGeometry& geom) {
  return bin_intensity(abs2(propagate(exit_wave(object, cs, pos, geom), geom.d2, geom)), geom.sr_ratio);
}

MeasurementSet simulate_dataset(const ComplexField& object, const CodedSurface& cs,
                                const std::vector<ScanPosition>& positions, const OpticalGeometry& geom,
                                const NoiseSpec& noise) {
  if (positions.empty()) throw std::invalid_argument("simulate_dataset: positions list is empty");
  geom.validate();
  require_same_shape(object, cs.transmittance(), "simulate_dataset");
  const auto r = static_cast<std::size_t>(geom.sr_ratio);
  if (object.rows() % r != 0 || object.cols() % r != 0)
    throw DimensionError("object size is not divisible by sr_ratio");

  // Propagation to the coded surface does not depend on k.
  const ComplexField psi_u = propagate(object, geom.d1, geom);
  const Propagator to_sensor(object.rows(), object.cols(), geom.d2, geom);
  const auto& t = cs.transmittance();

  MeasurementSet out;
  out.geom = geom;
  out.positions = positions;
  out.frames.reserve(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) {
    ComplexField u = shift(psi_u, positions[k], geom);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= t[i];
    RealGrid frame = bin_intensity(abs2(to_sensor.apply(u)), geom.sr_ratio);
    if (const auto* p = std::get_if<PoissonNoise>(&noise)) {
      if (!(p->photon_scale > 0.0)) throw std::invalid_argument("photon_scale must be > 0");
      CounterRng rng(p->seed, kNoiseStreamBase + k);
      for (auto& v : frame) v = static_cast<double>(rng.poisson(v * p->photon_scale)) / p->photon_scale;
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace cptych
