#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "cptych/field.hpp"
#include "cptych/forward.hpp"

namespace cptych {

/// Grayscale image source: either a PGM path or one of the built-in
/// synthetic scenes ("builtin:street", "builtin:peppers").
struct ImageSource {
  std::string ref = "builtin:street";
};

struct ScenarioConfig {
  std::size_t rows = 256;
  std::size_t cols = 256;
  std::size_t num_positions = 8;
  /// Max |dx|, |dy| in meters; <= 0 selects rows/8 * pitch.
  double position_span = 0.0;
  double background = 0.2;
  ImageSource amp_source{"builtin:street"};
  ImageSource phase_source{"builtin:peppers"};
  double phase_min = 0.0;
  double phase_max = std::numbers::pi;
  double cs_min_modulus = 0.3;
  std::string position_mode = "jittered_grid";
  std::uint64_t seed = 1;

  void validate(int sr_ratio) const;
};

struct PerturbationConfig {
  double sigma_amp = 0.0;
  double sigma_ang = 0.0;  // radians
  std::uint64_t seed = 0;
};

enum class PositionMode { RandomUniform, JitteredGrid };
PositionMode parse_position_mode(const std::string& name);

/// Loads a source as a [0, 1] real grid of the requested size.
RealGrid load_image(const ImageSource& src, std::size_t rows, std::size_t cols);

/// Procedural stand-ins: a street-like scene of facades, windows and
/// lettering, and a still life of shaded ellipses. Values in [0, 1].
RealGrid synthetic_street(std::size_t rows, std::size_t cols);
RealGrid synthetic_peppers(std::size_t rows, std::size_t cols);

/// (amp + background) * exp(j (phase_min + phase * (phase_max - phase_min))).
ComplexField make_ground_truth(const RealGrid& amplitude, const RealGrid& phase, double background,
                               double phase_min = 0.0, double phase_max = std::numbers::pi);
ComplexField make_ground_truth(const ScenarioConfig& cfg);

/// i.i.d. modulus uniform in [min_modulus, 1], phase uniform in [0, 2pi).
CodedSurface make_coded_surface(std::size_t rows, std::size_t cols, std::uint64_t seed, double min_modulus = 0.3);

/// Adds N(0, sigma_amp) to the modulus and N(0, sigma_ang) to the phase of
/// every entry, then clamps the modulus into [0, 1].
CodedSurface perturb_coded_surface(const CodedSurface& cs, const PerturbationConfig& p);

/// K distinct positions inside [-span, span]^2; K == 1 gives (0, 0).
std::vector<ScanPosition> make_positions(std::size_t k, double span, PositionMode mode, std::uint64_t seed);

// Netpbm P5 grayscale, maxval up to 65535 (16-bit big-endian samples).
struct PgmImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  unsigned maxval = 255;
  std::vector<std::uint16_t> pixels;
};
PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& img);
/// Maps values linearly from [lo, hi] onto 0..65535 (clamped).
PgmImage to_pgm16(const RealGrid& g, double lo, double hi);

}  // namespace cptych
