#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "stochmoments/sde.hpp"

namespace stochmoments::sde {

namespace {

void require_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::domain_error("step size must be positive, got " + std::to_string(h));
}

void require_noise_count(int m) {
  if (m < 0) throw std::invalid_argument("noise count must be nonnegative");
}

NoiseDraw empty_draw(double h, int m) {
  NoiseDraw d;
  d.h = h;
  d.dW = Vector::Zero(m);
  d.levy = Matrix::Zero(m, m);
  return d;
}

}  // namespace

double NoiseDraw::iterated(int i, int j) const {
  if (i == j) return 0.5 * (dW(i) * dW(i) - h);
  return 0.5 * (dW(i) * dW(j) + levy(i, j));
}

Vector sample_increments(RandomStream& rng, double h, int m) {
  require_step(h);
  require_noise_count(m);
  const double sd = std::sqrt(h);
  Vector dw(m);
  for (int i = 0; i < m; ++i) dw(i) = sd * rng.normal();
  return dw;
}

NoiseDraw sample_levy_subdiv(RandomStream& rng, double h, int substeps, int m) {
  require_step(h);
  require_noise_count(m);
  if (substeps < 1) throw std::invalid_argument("substeps must be at least 1");
  const double sd = std::sqrt(h / substeps);
  NoiseDraw d = empty_draw(h, m);
  if (m == 2) {
    double w1 = 0.0, w2 = 0.0, area = 0.0;
    for (int s = 0; s < substeps; ++s) {
      const double d1 = sd * rng.normal();
      const double d2 = sd * rng.normal();
      area += w1 * d2 - w2 * d1;
      w1 += d1;
      w2 += d2;
    }
    d.dW << w1, w2;
    d.levy(0, 1) = area;
    d.levy(1, 0) = -area;
    return d;
  }
  Vector step(m);
  for (int s = 0; s < substeps; ++s) {
    for (int i = 0; i < m; ++i) step(i) = sd * rng.normal();
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) d.levy(i, j) += d.dW(i) * step(j) - d.dW(j) * step(i);
    d.dW += step;
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) d.levy(j, i) = -d.levy(i, j);
  return d;
}

NoiseDraw sample_levy_fourier(RandomStream& rng, double h, int terms, bool tail_correction, int m) {
  require_step(h);
  require_noise_count(m);
  if (terms < 1) throw std::invalid_argument("Fourier terms must be at least 1");
  if (tail_correction && m != 2) throw std::invalid_argument("tail correction is implemented for two noises only");
  const double sqrt_h = std::sqrt(h);
  NoiseDraw d = empty_draw(h, m);
  Vector xi(m);
  for (int i = 0; i < m; ++i) xi(i) = rng.normal();
  d.dW = sqrt_h * xi;

  // A(i,j) = (h/pi) sum_r (1/r) [zeta_i (sqrt2 xi_j + eta_j) - zeta_j (sqrt2 xi_i + eta_i)]
  Vector zeta(m), eta(m);
  double inv_square_sum = 0.0;
  for (int r = 1; r <= terms; ++r) {
    for (int i = 0; i < m; ++i) zeta(i) = rng.normal();
    for (int i = 0; i < m; ++i) eta(i) = rng.normal();
    const double inv_r = 1.0 / r;
    inv_square_sum += inv_r * inv_r;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        d.levy(i, j) += inv_r * (zeta(i) * (std::numbers::sqrt2 * xi(j) + eta(j)) -
                                 zeta(j) * (std::numbers::sqrt2 * xi(i) + eta(i)));
  }
  d.levy *= h / std::numbers::pi;
  if (tail_correction) {
    // omitted harmonics: conditional variance 4 h^2 rho (xi1^2 + xi2^2 + 1)
    const double rho = 1.0 / 12.0 - inv_square_sum / (2.0 * std::numbers::pi * std::numbers::pi);
    d.levy(0, 1) += 2.0 * h * std::sqrt(std::max(rho, 0.0) * (xi(0) * xi(0) + xi(1) * xi(1) + 1.0)) * rng.normal();
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) d.levy(j, i) = -d.levy(i, j);
  return d;
}

NoiseDraw concatenate(const NoiseDraw& first, const NoiseDraw& second) {
  if (first.noise_count() != second.noise_count()) throw std::invalid_argument("concatenate: noise counts differ");
  NoiseDraw d;
  d.h = first.h + second.h;
  d.dW = first.dW + second.dW;
  d.levy = first.levy + second.levy + first.dW * second.dW.transpose() - second.dW * first.dW.transpose();
  return d;
}

void SamplerConfig::validate() const {
  if (kind == Kind::subdiv && substeps < 1) throw std::invalid_argument("substeps must be at least 1");
  if (kind == Kind::fourier && terms < 1) throw std::invalid_argument("Fourier terms must be at least 1");
}

NoiseDraw sample(const SamplerConfig& config, RandomStream& rng, double h, int m) {
  config.validate();
  if (m < 2) {
    NoiseDraw d = empty_draw(h, m);
    d.dW = sample_increments(rng, h, m);
    return d;
  }
  if (config.kind == SamplerConfig::Kind::subdiv) return sample_levy_subdiv(rng, h, config.substeps, m);
  return sample_levy_fourier(rng, h, config.terms, config.tail_correction && m == 2, m);
}

}  // namespace stochmoments::sde
