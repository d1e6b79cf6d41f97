#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "cptych/field.hpp"

namespace testing {

using cptych::Complex;
using cptych::ComplexField;
using cptych::RealGrid;

inline ComplexField random_field(std::size_t rows, std::size_t cols, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  ComplexField f(rows, cols);
  for (auto& v : f) v = {n(gen), n(gen)};
  return f;
}

inline RealGrid random_real(std::size_t rows, std::size_t cols, std::mt19937_64& gen, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RealGrid g(rows, cols);
  for (auto& v : g) v = u(gen);
  return g;
}

template <typename T>
double max_abs_diff(const cptych::Grid<T>& a, const cptych::Grid<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_l2(const ComplexField& a, const ComplexField& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - ref[i]);
    den += std::norm(ref[i]);
  }
  return std::sqrt(num / den);
}

// Removes every frequency that the angular-spectrum kernel would cut, so the
// field is exactly representable on the propagating band.
inline ComplexField band_limit(const ComplexField& f, const cptych::OpticalGeometry& g) {
  auto spec = cptych::fft2(f);
  const auto freq = cptych::FrequencyGrid::make(f.rows(), f.cols(), g.pitch);
  const double k2 = 1.0 / (g.wavelength * g.wavelength);
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t c = 0; c < f.cols(); ++c)
      if (k2 - freq.fx[c] * freq.fx[c] - freq.fy[r] * freq.fy[r] < 0.0) spec(r, c) = 0.0;
  return cptych::ifft2(spec);
}

}  // namespace testing
