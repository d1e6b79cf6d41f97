#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cptych {

using Complex = std::complex<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major 2D grid. ComplexField carries wavefields, objects and
/// surfaces; RealGrid carries intensities.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw DimensionError("grid dimensions must be positive");
  }
  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw DimensionError("grid dimensions must be positive");
    if (data_.size() != rows * cols) throw DimensionError("grid data length does not match rows*cols");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool same_shape(const Grid& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ComplexField = Grid<Complex>;
using RealGrid = Grid<double>;

struct OpticalGeometry {
  double wavelength = 532e-9;  // m
  double pitch = 1e-6;         // m, object-plane sample spacing
  double d1 = 500e-6;          // m, object -> coded surface
  double d2 = 500e-6;          // m, coded surface -> sensor
  int sr_ratio = 4;            // object samples per sensor pixel per axis

  void validate() const;
  friend bool operator==(const OpticalGeometry&, const OpticalGeometry&) = default;
};

/// Lateral translation in meters. Fractional pixels allowed.
struct ScanPosition {
  double dx = 0.0;  // along columns
  double dy = 0.0;  // along rows
  friend bool operator==(const ScanPosition&, const ScanPosition&) = default;
};

/// Spatial frequencies in FFT order: DC at index 0, positive frequencies up to
/// (but excluding, for even N) the Nyquist bin, which is stored as -N/2.
struct FrequencyGrid {
  std::vector<double> fx;  // cycles/m, length cols
  std::vector<double> fy;  // cycles/m, length rows

  static FrequencyGrid make(std::size_t rows, std::size_t cols, double pitch);
};

// Unitary 2D DFT pair (both directions scaled by 1/sqrt(rows*cols)).
ComplexField fft2(const ComplexField& f);
ComplexField ifft2(const ComplexField& f);

/// Band-limited angular-spectrum propagation over `distance` meters.
/// Evanescent components are zeroed. Negative distances back-propagate.
ComplexField propagate(const ComplexField& f, double distance, const OpticalGeometry& geom);

/// Fourier phase-ramp translation: ifft2(exp(j2pi(fx dx + fy dy)) * fft2(f)).
/// Circular boundaries; the content moves by (-dx, -dy).
ComplexField shift(const ComplexField& f, ScanPosition pos, const OpticalGeometry& geom);

/// Sums each non-overlapping r x r block (sensor pixel energy collection).
RealGrid bin_intensity(const RealGrid& intensity, int r);

/// Transpose of bin_intensity: replicates each value into its r x r block.
RealGrid upsample_adjoint(const RealGrid& s, int r);

// Element-wise helpers shared by the rest of the library.
RealGrid abs2(const ComplexField& f);
double norm2_squared(const ComplexField& f);
double norm2(const ComplexField& f);
Complex inner(const ComplexField& a, const ComplexField& b);  // sum conj(a) * b
bool all_finite(const ComplexField& f);
void require_same_shape(const ComplexField& a, const ComplexField& b, const char* what);

}  // namespace cptych
