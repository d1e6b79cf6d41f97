#include "cptych/propagator.hpp"

#include <cmath>
#include <numbers>

namespace cptych {

namespace {

ComplexField multiply_spectrum(const ComplexField& f, const ComplexField& kernel, bool conjugate) {
  require_same_shape(f, kernel, "Fourier multiplier");
  ComplexField spec = fft2(f);
  if (conjugate) {
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::conj(kernel[i]);
  } else {
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kernel[i];
  }
  return ifft2(spec);
}

ComplexField transfer_kernel(std::size_t rows, std::size_t cols, double distance, const OpticalGeometry& geom) {
  geom.validate();
  if (!std::isfinite(distance)) throw std::invalid_argument("propagation distance must be finite");
  const auto freq = FrequencyGrid::make(rows, cols, geom.pitch);
  const double inv_l2 = 1.0 / (geom.wavelength * geom.wavelength);
  ComplexField k(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double arg = inv_l2 - freq.fx[j] * freq.fx[j] - freq.fy[i] * freq.fy[i];
      if (arg >= 0.0) k(i, j) = std::polar(1.0, 2.0 * std::numbers::pi * distance * std::sqrt(arg));
    }
  }
  return k;
}

ComplexField ramp_kernel(std::size_t rows, std::size_t cols, ScanPosition pos, const OpticalGeometry& geom) {
  geom.validate();
  if (!std::isfinite(pos.dx) || !std::isfinite(pos.dy)) throw std::invalid_argument("scan position must be finite");
  const auto freq = FrequencyGrid::make(rows, cols, geom.pitch);
  std::vector<Complex> rx(cols), ry(rows);
  for (std::size_t j = 0; j < cols; ++j) rx[j] = std::polar(1.0, 2.0 * std::numbers::pi * freq.fx[j] * pos.dx);
  for (std::size_t i = 0; i < rows; ++i) ry[i] = std::polar(1.0, 2.0 * std::numbers::pi * freq.fy[i] * pos.dy);
  ComplexField k(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) k(i, j) = ry[i] * rx[j];
  return k;
}

}  // namespace

ComplexField FourierMultiplier::apply(const ComplexField& f) const {
  return multiply_spectrum(f, kernel_, false);
}

ComplexField FourierMultiplier::apply_adjoint(const ComplexField& f) const {
  return multiply_spectrum(f, kernel_, true);
}

Propagator::Propagator(std::size_t rows, std::size_t cols, double distance, const OpticalGeometry& geom)
    : FourierMultiplier(transfer_kernel(rows, cols, distance, geom)) {}

PhaseRamp::PhaseRamp(std::size_t rows, std::size_t cols, ScanPosition pos, const OpticalGeometry& geom)
    : FourierMultiplier(ramp_kernel(rows, cols, pos, geom)) {}

}  // namespace cptych
