#include "cptych/tv_prox.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cptych {

bool TVProxConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("tv lambda must be >= 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("tv eta must be > 0");
  if (sub_iters < 1) throw std::invalid_argument("tv sub_iters must be >= 1");
  return eta <= 1.0 / 8.0;
}

DualState DualState::zeros(std::size_t rows, std::size_t cols) {
  return DualState{ComplexField(rows, cols), ComplexField(rows, cols)};
}

double tv_seminorm(const ComplexField& o) {
  const std::size_t n1 = o.rows(), n2 = o.cols();
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) tv += std::abs(o(i + 1, j) - o(i, j));
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j + 1 < n2; ++j) tv += std::abs(o(i, j + 1) - o(i, j));
  return tv;
}

DualState diff_forward(const ComplexField& o) {
  const std::size_t n1 = o.rows(), n2 = o.cols();
  auto w = DualState::zeros(n1, n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j + 1 < n2; ++j) w.h(i, j) = o(i, j + 1) - o(i, j);
  for (std::size_t i = 0; i + 1 < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) w.v(i, j) = o(i + 1, j) - o(i, j);
  return w;
}

ComplexField diff_adjoint(const DualState& w) {
  const std::size_t n1 = w.h.rows(), n2 = w.h.cols();
  if (!w.h.same_shape(w.v)) throw DimensionError("dual components differ in shape");
  ComplexField out(n1, n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      Complex s{};
      if (j + 1 < n2) s -= w.h(i, j);
      if (j > 0) s += w.h(i, j - 1);
      if (i + 1 < n1) s -= w.v(i, j);
      if (i > 0) s += w.v(i - 1, j);
      out(i, j) = s;
    }
  }
  return out;
}

namespace {

void clamp_disk(ComplexField& f, double lambda) {
  for (auto& v : f) {
    const double m = std::abs(v);
    if (m > lambda) {
      v *= lambda / m;
      // Rounding can leave |v| an ulp above lambda; shrink until inside so the
      // projection is exactly feasible and idempotent.
      while (std::abs(v) > lambda) v *= 1.0 - std::numeric_limits<double>::epsilon();
    }
  }
}

}  // namespace

DualState project_dual(DualState w, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("project_dual: lambda must be >= 0");
  clamp_disk(w.h, lambda);
  clamp_disk(w.v, lambda);
  return w;
}

ComplexField tv_prox(const ComplexField& psi_o, const TVProxConfig& cfg, const DualObserver& observer) {
  cfg.validate();
  const std::size_t n1 = psi_o.rows(), n2 = psi_o.cols();
  if (cfg.lambda == 0.0) return psi_o;

  auto w = DualState::zeros(n1, n2);
  DualState z = w;
  for (int t = 1; t <= cfg.sub_iters; ++t) {
    // Descent along -grad G(z) = D(psi_o - D^H z).
    ComplexField residual = diff_adjoint(z);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = psi_o[i] - residual[i];
    DualState g = diff_forward(residual);
    for (std::size_t i = 0; i < g.h.size(); ++i) {
      g.h[i] = z.h[i] + cfg.eta * g.h[i];
      g.v[i] = z.v[i] + cfg.eta * g.v[i];
    }
    DualState next = project_dual(std::move(g), cfg.lambda);

    const double eps = static_cast<double>(t) / (t + 3.0);
    for (std::size_t i = 0; i < next.h.size(); ++i) {
      z.h[i] = next.h[i] + eps * (next.h[i] - w.h[i]);
      z.v[i] = next.v[i] + eps * (next.v[i] - w.v[i]);
    }
    w = std::move(next);
    if (observer) observer(t, w);
  }

  ComplexField out = diff_adjoint(w);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = psi_o[i] - out[i];
  return out;
}

}  // namespace cptych
