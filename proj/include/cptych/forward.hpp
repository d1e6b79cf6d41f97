#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "cptych/field.hpp"

namespace cptych {

/// Passive coded surface: every entry has modulus <= 1 (+1e-9).
class CodedSurface {
 public:
  static constexpr double kModulusTolerance = 1e-9;

  CodedSurface() = default;
  /// Throws std::invalid_argument if any entry violates the modulus bound.
  explicit CodedSurface(ComplexField transmittance);

  /// Projects onto the unit disk (modulus clamp, phase kept).
  static CodedSurface clamped(ComplexField transmittance);
  static CodedSurface ones(std::size_t rows, std::size_t cols);

  const ComplexField& transmittance() const noexcept { return t_; }
  std::size_t rows() const noexcept { return t_.rows(); }
  std::size_t cols() const noexcept { return t_.cols(); }

 private:
  ComplexField t_;
};

/// Projects every entry onto |z| <= 1 in place.
void clamp_unit_modulus(ComplexField& f);

struct MeasurementSet {
  std::vector<ScanPosition> positions;
  std::vector<RealGrid> frames;
  OpticalGeometry geom;

  std::size_t size() const noexcept { return positions.size(); }
  /// Checks the K >= 1, non-negativity and shared-shape invariants.
  void validate() const;
  /// Mean over frames of the total frame energy.
  double mean_frame_energy() const;
};

inline constexpr std::uint64_t kNoiseStreamBase = 16;

struct NoNoise {};
struct PoissonNoise {
  double photon_scale = 1.0;  // expected photons per unit intensity
  std::uint64_t seed = 0;
};
using NoiseSpec = std::variant<NoNoise, PoissonNoise>;

// H_k P_d1 O, times the coded surface.
ComplexField exit_wave(const ComplexField& object, const CodedSurface& cs, ScanPosition pos,
                       const OpticalGeometry& geom);

// S |P_d2 exit_wave|^2
RealGrid forward_intensity(const ComplexField& object, const CodedSurface& cs, ScanPosition pos,
                           const OpticalGeometry& geom);

/// Frame k is forward_intensity at positions[k]; with PoissonNoise it is
/// Poisson(I * scale) / scale drawn from CounterRng(seed, stream = 16 + k).
MeasurementSet simulate_dataset(const ComplexField& object, const CodedSurface& cs,
                                const std::vector<ScanPosition>& positions, const OpticalGeometry& geom,
                                const NoiseSpec& noise = NoNoise{});

}  // namespace cptych
