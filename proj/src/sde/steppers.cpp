#include <stdexcept>
#include <vector>

#include "stochmoments/sde.hpp"

namespace stochmoments::sde {

namespace {

void check_state(const SemilinearSystem& system, const Vector& y) {
  if (y.size() != system.dimension()) throw std::invalid_argument("state has the wrong dimension");
}

// y + (g0 - sum Fj gj) h + sum gj dWj, and the values gj(y) for reuse.
Vector euler_bracket(const SemilinearSystem& system, const Vector& y, const NoiseDraw& draw,
                     std::vector<Vector>& g_values) {
  Vector v = y;
  if (system.linear()) return v;
  const int m = system.noise_count();
  g_values.resize(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) g_values[static_cast<std::size_t>(j)] = system.g[static_cast<std::size_t>(j)](y);
  v += g_values[0] * draw.h;
  for (int j = 1; j <= m; ++j) {
    const auto& gj = g_values[static_cast<std::size_t>(j)];
    v += gj * draw.dW(j - 1) - system.F[static_cast<std::size_t>(j - 1)] * gj * draw.h;
  }
  return v;
}

}  // namespace

Vector magnus_euler_step(const SemilinearSystem& system, const Vector& y, const NoiseDraw& draw) {
  check_state(system, y);
  std::vector<Vector> g_values;
  const Vector v = euler_bracket(system, y, draw, g_values);
  return expm(omega(system, draw, 1)) * v;
}

Vector magnus_milstein_step(const SemilinearSystem& system, const Vector& y, const NoiseDraw& draw) {
  check_state(system, y);
  std::vector<Vector> g_values;
  Vector v = euler_bracket(system, y, draw, g_values);
  if (!system.linear()) {
    const int m = system.noise_count();
    for (int j = 0; j < m; ++j) {
      const Matrix gj_prime = jacobian(system, j + 1, y);
      const auto& gj = g_values[static_cast<std::size_t>(j) + 1];
      for (int i = 0; i < m; ++i) {
        const auto& Fi = system.F[static_cast<std::size_t>(i)];
        const Vector bi = Fi * y + g_values[static_cast<std::size_t>(i) + 1];
        v += (gj_prime * bi - Fi * gj) * draw.iterated(i, j);
      }
    }
  }
  return expm(omega(system, draw, 2)) * v;
}

Vector classical_milstein_step(const SemilinearSystem& system, const Vector& y, const NoiseDraw& draw) {
  check_state(system, y);
  const int m = system.noise_count();
  if (draw.noise_count() != m) throw std::invalid_argument("draw has the wrong number of noises");
  const bool nonlinear = !system.linear();
  std::vector<Vector> b(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    b[static_cast<std::size_t>(j)] = system.F[static_cast<std::size_t>(j)] * y;
    if (nonlinear) b[static_cast<std::size_t>(j)] += system.g[static_cast<std::size_t>(j) + 1](y);
  }
  Vector out = y + system.F0 * y * draw.h;
  if (nonlinear) out += system.g[0](y) * draw.h;
  for (int j = 0; j < m; ++j) {
    const auto& bj = b[static_cast<std::size_t>(j)];
    out += bj * draw.dW(j);
    Matrix bj_prime = system.F[static_cast<std::size_t>(j)];
    if (nonlinear) bj_prime += jacobian(system, j + 1, y);
    for (int i = 0; i < m; ++i) out += bj_prime * b[static_cast<std::size_t>(i)] * draw.iterated(i, j);
  }
  return out;
}

TestSystem2::TestSystem2(const TestSdeParams& params) {
  params.validate();
  F0 = params.lambda * Eigen::Matrix2d::Identity();
  F1 << params.sigma1, 0.0, 0.0, -params.sigma1;
  F2 << 0.0, params.sigma2, params.sigma2, 0.0;
  G = -0.5 * (F1 * F2 - F2 * F1);
  drift_corrected = F0 - 0.5 * (F1 * F1 + F2 * F2);
}

Eigen::Vector2d TestSystem2::magnus_euler(const Eigen::Vector2d& y, double h, double dw1, double dw2) const {
  return expm2(drift_corrected * h + F1 * dw1 + F2 * dw2) * y;
}

Eigen::Vector2d TestSystem2::magnus_milstein(const Eigen::Vector2d& y, double h, double dw1, double dw2,
                                             double area) const {
  return expm2(drift_corrected * h + F1 * dw1 + F2 * dw2 + G * area) * y;
}

Eigen::Vector2d TestSystem2::classical_milstein(const Eigen::Vector2d& y, double h, double dw1, double dw2,
                                                double area) const {
  const double i11 = 0.5 * (dw1 * dw1 - h);
  const double i22 = 0.5 * (dw2 * dw2 - h);
  const double i12 = 0.5 * (dw1 * dw2 + area);
  const double i21 = 0.5 * (dw1 * dw2 - area);
  const Eigen::Vector2d f1y = F1 * y;
  const Eigen::Vector2d f2y = F2 * y;
  return y + F0 * y * h + f1y * dw1 + f2y * dw2 + F1 * (f1y * i11 + f2y * i21) + F2 * (f1y * i12 + f2y * i22);
}

}  // namespace stochmoments::sde
