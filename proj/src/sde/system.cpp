#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stochmoments/sde.hpp"

namespace stochmoments::sde {

void SemilinearSystem::validate() const {
  const auto d = F0.rows();
  if (F0.cols() != d) throw std::invalid_argument("F0 must be square");
  for (std::size_t j = 0; j < F.size(); ++j)
    if (F[j].rows() != d || F[j].cols() != d)
      throw std::invalid_argument("F" + std::to_string(j + 1) + " must be " + std::to_string(d) + "x" +
                                  std::to_string(d));
  if (!g.empty() && g.size() != F.size() + 1)
    throw std::invalid_argument("nonlinear terms need g0..gm (" + std::to_string(F.size() + 1) + " functions)");
  if (!jac.empty() && jac.size() != F.size())
    throw std::invalid_argument("Jacobians must cover g1..gm (" + std::to_string(F.size()) + " entries)");
  if (g.empty() && !jac.empty()) throw std::invalid_argument("Jacobians given without nonlinear terms");
}

void TestSdeParams::validate() const {
  if (lambda == 0.0 || sigma1 == 0.0 || sigma2 == 0.0)
    throw std::domain_error("test system parameters must be nonzero");
  if (!std::isfinite(lambda) || !std::isfinite(sigma1) || !std::isfinite(sigma2))
    throw std::domain_error("test system parameters must be finite");
}

SemilinearSystem test_system(const TestSdeParams& params) {
  params.validate();
  SemilinearSystem s;
  s.F0 = params.lambda * Matrix::Identity(2, 2);
  Matrix f1(2, 2), f2(2, 2);
  f1 << params.sigma1, 0.0, 0.0, -params.sigma1;
  f2 << 0.0, params.sigma2, params.sigma2, 0.0;
  s.F = {f1, f2};
  return s;
}

bool ms_stable_true(const TestSdeParams& params) {
  params.validate();
  return 2.0 * params.lambda + params.sigma1 * params.sigma1 + params.sigma2 * params.sigma2 < 0.0;
}

Matrix omega(const SemilinearSystem& system, const NoiseDraw& draw, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("omega: order must be 1 or 2");
  const int m = system.noise_count();
  if (draw.noise_count() != m) throw std::invalid_argument("omega: draw has the wrong number of noises");
  Matrix out = system.F0 * draw.h;
  for (int j = 0; j < m; ++j) out += system.F[j] * draw.dW(j) - 0.5 * draw.h * system.F[j] * system.F[j];
  if (order == 2)
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        out -= 0.5 * (system.F[i] * system.F[j] - system.F[j] * system.F[i]) * draw.levy(i, j);
  return out;
}

Matrix jacobian(const SemilinearSystem& system, int j, const Vector& y) {
  if (j < 1 || j > system.noise_count()) throw std::invalid_argument("jacobian: index out of range");
  const auto idx = static_cast<std::size_t>(j);
  if (!system.jac.empty() && system.jac[idx - 1]) return system.jac[idx - 1](y);
  const auto& gj = system.g.at(idx);
  const double step = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, y.norm());
  Matrix out(y.size(), y.size());
  Vector probe = y;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    probe(k) = y(k) + step;
    const Vector plus = gj(probe);
    probe(k) = y(k) - step;
    const Vector minus = gj(probe);
    probe(k) = y(k);
    out.col(k) = (plus - minus) / (2.0 * step);
  }
  return out;
}

}  // namespace stochmoments::sde
