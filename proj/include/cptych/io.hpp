#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>

#include "cptych/field.hpp"
#include "cptych/forward.hpp"

namespace cptych {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset file. Layout (all little-endian, see docs/formats.md):
///
///   magic "CPTYCHDS" | u32 version | u32 flags
///   f64 wavelength, pitch, d1, d2 | u32 sr_ratio | u32 K
///   u32 object rows, cols | u32 frame rows, cols | u64 seed | u64 config hash
///   K x (f64 dx, f64 dy)
///   K frames of f64, row-major
///   [flags & 1] ground-truth object, complex f64 interleaved
///   [flags & 2] coded surface, complex f64 interleaved
struct DatasetContainer {
  static constexpr char kMagic[8] = {'C', 'P', 'T', 'Y', 'C', 'H', 'D', 'S'};
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 88;

  MeasurementSet measurements;
  std::size_t object_rows = 0;
  std::size_t object_cols = 0;
  std::optional<ComplexField> ground_truth;
  std::optional<CodedSurface> coded_surface;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

void write_dataset(std::ostream& out, const DatasetContainer& ds);
void write_dataset(const std::filesystem::path& path, const DatasetContainer& ds);
DatasetContainer read_dataset(std::istream& in);
DatasetContainer read_dataset(const std::filesystem::path& path);

/// Complex array file: magic "CPTYCHCA" | u32 version | u32 reserved (0) |
/// u32 rows | u32 cols | rows*cols interleaved f64 (re, im).
void write_complex_array(const std::filesystem::path& path, const ComplexField& f);
ComplexField read_complex_array(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace cptych
