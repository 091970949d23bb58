#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "stochmoments/sde.hpp"

namespace stochmoments::sde {

namespace {

// C = sum delta^k / (2k)!, S = sum delta^k / (2k+1)!  (cosh/sinh of sqrt(delta) or their
// trigonometric counterparts for delta < 0).
void even_odd_series(double delta, double& c, double& s) {
  if (std::abs(delta) < 1e-8) {
    c = 1.0 + delta / 2.0 + delta * delta / 24.0;
    s = 1.0 + delta / 6.0 + delta * delta / 120.0;
  } else if (delta > 0.0) {
    const double r = std::sqrt(delta);
    c = std::cosh(r);
    s = std::sinh(r) / r;
  } else {
    const double r = std::sqrt(-delta);
    c = std::cos(r);
    s = std::sin(r) / r;
  }
}

}  // namespace

Eigen::Matrix2d expm2(const Eigen::Matrix2d& m) {
  if (!m.allFinite()) throw std::domain_error("expm: non-finite entry");
  // m = mu I + B with B^2 = delta I
  const double mu = 0.5 * m.trace();
  const double half_gap = 0.5 * (m(0, 0) - m(1, 1));
  const double delta = half_gap * half_gap + m(0, 1) * m(1, 0);
  double c, s;
  even_odd_series(delta, c, s);
  const double scale = std::exp(mu);
  Eigen::Matrix2d out;
  out << c + s * half_gap, s * m(0, 1), s * m(1, 0), c - s * half_gap;
  return scale * out;
}

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (!m.allFinite()) throw std::domain_error("expm: non-finite entry");
  if (m.rows() == 2) return expm2(m);
  if (m.rows() == 0) return m;
  return m.exp();
}

}  // namespace stochmoments::sde
