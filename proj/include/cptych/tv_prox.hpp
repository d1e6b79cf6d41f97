#pragma once

#include <functional>

#include "cptych/field.hpp"

namespace cptych {

struct TVProxConfig {
  double lambda = 1e-3;
  double eta = 1.0 / 8.0;  // dual step; 1/8 bounds the Lipschitz constant of D D^H
  int sub_iters = 20;

  /// Throws on lambda < 0, eta <= 0 or sub_iters < 1. Returns false (and the
  /// caller may warn) when eta exceeds the 1/8 convergence bound.
  bool validate() const;
};

/// Dual variable of the TV prox: one complex difference per pixel and
/// direction. The last column of `h` and the last row of `v` are
/// structurally zero.
struct DualState {
  ComplexField h;  // O[i, j+1] - O[i, j]
  ComplexField v;  // O[i+1, j] - O[i, j]

  static DualState zeros(std::size_t rows, std::size_t cols);
};

/// Anisotropic complex TV with non-periodic forward differences.
double tv_seminorm(const ComplexField& o);

DualState diff_forward(const ComplexField& o);
/// Exact adjoint of diff_forward (negative divergence).
ComplexField diff_adjoint(const DualState& w);

/// Radial clamp of every entry to modulus <= lambda.
DualState project_dual(DualState w, double lambda);

/// Observer hook for tests: called with (t, w_t) after each projection.
using DualObserver = std::function<void(int, const DualState&)>;

/// Solves argmin_O 0.5 ||O - psi_o||^2 + lambda TV(O) through its dual with
/// Nesterov-accelerated gradient projection, cold-started at w = 0:
///
///   w_t = P(z_{t-1} + eta D(psi_o - D^H z_{t-1}))
///   z_t = w_t + t/(t+3) (w_t - w_{t-1})
///
/// and returns psi_o - D^H w_T.
ComplexField tv_prox(const ComplexField& psi_o, const TVProxConfig& cfg, const DualObserver& observer = {});

}  // namespace cptych
