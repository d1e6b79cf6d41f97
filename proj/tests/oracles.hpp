#pragma once

#include <cmath>
#include <vector>

#include "cptych/field.hpp"

namespace testing {

using cptych::Complex;
using cptych::ComplexField;

// Relative error between a finite-difference gradient over (Re, Im) of every
// entry and `factor` times the given complex gradient.
template <typename F>
double fd_mismatch(const ComplexField& x, const ComplexField& grad, double factor, F&& f, double h = 1e-6) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (const Complex dir : {Complex{1, 0}, Complex{0, 1}}) {
      ComplexField p = x, m = x;
      p[i] += h * dir;
      m[i] -= h * dir;
      const double fd = (f(p) - f(m)) / (2 * h);
      const double an = factor * (dir.real() != 0.0 ? grad[i].real() : grad[i].imag());
      num += (fd - an) * (fd - an);
      den += an * an;
    }
  }
  return std::sqrt(num / den);
}


// Independent slow oracle: its own difference operators and plain projected
// gradient on the dual, no extrapolation.
struct PlainDualSolver {
  std::size_t n1, n2;

  void forward(const std::vector<Complex>& o, std::vector<Complex>& h, std::vector<Complex>& v) const {
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        h[i * n2 + j] = j + 1 < n2 ? o[i * n2 + j + 1] - o[i * n2 + j] : Complex{};
        v[i * n2 + j] = i + 1 < n1 ? o[(i + 1) * n2 + j] - o[i * n2 + j] : Complex{};
      }
  }

  // Transpose of forward(), built by scattering each difference back.
  std::vector<Complex> adjoint(const std::vector<Complex>& h, const std::vector<Complex>& v) const {
    std::vector<Complex> o(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        if (j + 1 < n2) {
          o[i * n2 + j + 1] += h[i * n2 + j];
          o[i * n2 + j] -= h[i * n2 + j];
        }
        if (i + 1 < n1) {
          o[(i + 1) * n2 + j] += v[i * n2 + j];
          o[i * n2 + j] -= v[i * n2 + j];
        }
      }
    return o;
  }

  ComplexField solve(const ComplexField& psi, double lambda, double eta, long iters) const {
    const std::size_t n = n1 * n2;
    std::vector<Complex> p(psi.begin(), psi.end()), h(n), v(n), gh(n), gv(n);
    auto clamp = [lambda](Complex& z) {
      const double m = std::abs(z);
      if (m > lambda) z *= lambda / m;
    };
    for (long t = 0; t < iters; ++t) {
      auto r = adjoint(h, v);
      for (std::size_t i = 0; i < n; ++i) r[i] = p[i] - r[i];
      forward(r, gh, gv);
      for (std::size_t i = 0; i < n; ++i) {
        h[i] += eta * gh[i];
        v[i] += eta * gv[i];
        clamp(h[i]);
        clamp(v[i]);
      }
    }
    const auto d = adjoint(h, v);
    ComplexField out(n1, n2);
    for (std::size_t i = 0; i < n; ++i) out[i] = p[i] - d[i];
    return out;
  }
};

}  // namespace testing
