#pragma once

#include "stochmoments/sde.hpp"

namespace stochmoments::mc::detail {

/// sde::sample, or an empty draw when there is no noise.
sde::NoiseDraw draw_noise(const sde::SamplerConfig& sampler, sde::RandomStream& rng, double h, int m);

}  // namespace stochmoments::mc::detail
