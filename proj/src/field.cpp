#include "cptych/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "cptych/propagator.hpp"

namespace cptych {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(rows, cols, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> in(rows * cols), out(rows * cols);
    fftw_plan p = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                   reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

ComplexField transform(const ComplexField& f, int sign) {
  ComplexField out(f.rows(), f.cols());
  fftw_plan p = PlanCache::instance().get(f.rows(), f.cols(), sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(f.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(f.size()));
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> fft_frequencies(std::size_t n, double pitch) {
  std::vector<double> f(n);
  const double df = 1.0 / (static_cast<double>(n) * pitch);
  const auto half = static_cast<std::ptrdiff_t>((n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    auto k = static_cast<std::ptrdiff_t>(i);
    if (k > half) k -= static_cast<std::ptrdiff_t>(n);
    f[i] = static_cast<double>(k) * df;
  }
  return f;
}

void check_ratio(int r) {
  if (r < 1) throw std::invalid_argument("binning ratio must be >= 1");
}

}  // namespace

void OpticalGeometry::validate() const {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) throw std::invalid_argument("wavelength must be > 0");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw std::invalid_argument("pitch must be > 0");
  if (!std::isfinite(d1) || !std::isfinite(d2)) throw std::invalid_argument("propagation distances must be finite");
  if (sr_ratio < 1) throw std::invalid_argument("sr_ratio must be >= 1");
}

FrequencyGrid FrequencyGrid::make(std::size_t rows, std::size_t cols, double pitch) {
  return FrequencyGrid{fft_frequencies(cols, pitch), fft_frequencies(rows, pitch)};
}

ComplexField fft2(const ComplexField& f) { return transform(f, FFTW_FORWARD); }
ComplexField ifft2(const ComplexField& f) { return transform(f, FFTW_BACKWARD); }

ComplexField propagate(const ComplexField& f, double distance, const OpticalGeometry& geom) {
  return Propagator(f.rows(), f.cols(), distance, geom).apply(f);
}

ComplexField shift(const ComplexField& f, ScanPosition pos, const OpticalGeometry& geom) {
  return PhaseRamp(f.rows(), f.cols(), pos, geom).apply(f);
}

RealGrid bin_intensity(const RealGrid& intensity, int r) {
  check_ratio(r);
  const auto ur = static_cast<std::size_t>(r);
  if (intensity.rows() % ur != 0 || intensity.cols() % ur != 0)
    throw DimensionError("grid " + std::to_string(intensity.rows()) + "x" + std::to_string(intensity.cols()) +
                         " is not divisible by binning ratio " + std::to_string(r));
  RealGrid out(intensity.rows() / ur, intensity.cols() / ur, 0.0);
  for (std::size_t i = 0; i < intensity.rows(); ++i)
    for (std::size_t j = 0; j < intensity.cols(); ++j) out(i / ur, j / ur) += intensity(i, j);
  return out;
}

RealGrid upsample_adjoint(const RealGrid& s, int r) {
  check_ratio(r);
  const auto ur = static_cast<std::size_t>(r);
  RealGrid out(s.rows() * ur, s.cols() * ur);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = s(i / ur, j / ur);
  return out;
}

RealGrid abs2(const ComplexField& f) {
  RealGrid out(f.rows(), f.cols());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::norm(f[i]);
  return out;
}

double norm2_squared(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f) s += std::norm(v);
  return s;
}

double norm2(const ComplexField& f) { return std::sqrt(norm2_squared(f)); }

Complex inner(const ComplexField& a, const ComplexField& b) {
  require_same_shape(a, b, "inner product");
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

bool all_finite(const ComplexField& f) {
  for (const auto& v : f)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

void require_same_shape(const ComplexField& a, const ComplexField& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

}  // namespace cptych
