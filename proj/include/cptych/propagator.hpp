#pragma once

#include "cptych/field.hpp"

namespace cptych {

/// Precomputed Fourier multiplier. Applying it costs two FFTs and one
/// element-wise product; the solvers keep one per distance/position.
class FourierMultiplier {
 public:
  FourierMultiplier() = default;
  explicit FourierMultiplier(ComplexField kernel) : kernel_(std::move(kernel)) {}

  ComplexField apply(const ComplexField& f) const;
  /// Applies conj(kernel), the adjoint of apply().
  ComplexField apply_adjoint(const ComplexField& f) const;

  const ComplexField& kernel() const noexcept { return kernel_; }

 private:
  ComplexField kernel_;
};

/// Angular-spectrum transfer exp(j2pi d sqrt(1/lambda^2 - fx^2 - fy^2)),
/// zero on evanescent frequencies.
class Propagator : public FourierMultiplier {
 public:
  Propagator(std::size_t rows, std::size_t cols, double distance, const OpticalGeometry& geom);
};

/// Translation ramp exp(j2pi (fx dx + fy dy)).
class PhaseRamp : public FourierMultiplier {
 public:
  PhaseRamp(std::size_t rows, std::size_t cols, ScanPosition pos, const OpticalGeometry& geom);
};

}  // namespace cptych
