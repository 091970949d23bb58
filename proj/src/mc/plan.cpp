#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "internal.hpp"
#include "stochmoments/mc.hpp"
#include "stochmoments/numkernel/parallel.hpp"

namespace stochmoments::mc {

namespace {

constexpr double kWholeStepTolerance = 1e-9;

}  // namespace

namespace detail {

sde::NoiseDraw draw_noise(const sde::SamplerConfig& sampler, sde::RandomStream& rng, double h, int m) {
  if (m == 0) {
    sde::NoiseDraw d;
    d.h = h;
    d.dW = sde::Vector(0);
    d.levy = sde::Matrix(0, 0);
    return d;
  }
  return sde::sample(sampler, rng, h, m);
}

}  // namespace detail

std::string to_string(Method method) {
  switch (method) {
    case Method::magnus_euler:
      return "magnus-euler";
    case Method::magnus_milstein:
      return "magnus-milstein";
    case Method::classical_milstein:
      return "classical-milstein";
  }
  throw std::invalid_argument("unknown method");
}

Method parse_method(std::string_view name) {
  for (const Method m : {Method::magnus_euler, Method::magnus_milstein, Method::classical_milstein})
    if (name == to_string(m)) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected magnus-euler, magnus-milstein or classical-milstein)");
}

int SimulationPlan::dimension() const {
  if (const auto* s = std::get_if<sde::SemilinearSystem>(&system)) return s->dimension();
  return 2;
}

int SimulationPlan::noise_count() const {
  if (const auto* s = std::get_if<sde::SemilinearSystem>(&system)) return s->noise_count();
  return 2;
}

long SimulationPlan::steps() const { return std::lround(t_end / h); }

void SimulationPlan::validate() const {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("step size must lie in (0, 1), got " + std::to_string(h));
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
  const double ratio = t_end / h;
  if (std::lround(ratio) < 1 || std::abs(ratio - std::round(ratio)) > kWholeStepTolerance * ratio)
    throw std::invalid_argument("t_end / h must be a positive whole number of steps");
  if (paths < 1) throw std::invalid_argument("paths must be positive");
  if (batches < 1) throw std::invalid_argument("batches must be positive");
  if (const auto* p = std::get_if<sde::TestSdeParams>(&system)) {
    p->validate();
  } else {
    std::get<sde::SemilinearSystem>(system).validate();
  }
  if (y0.size() != dimension()) throw std::invalid_argument("initial state has the wrong dimension");
  sampler.validate();
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 16;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (const double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MomentEstimate summarize(std::span<const double> values, int batches) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  if (batches < 1 || values.size() % static_cast<std::size_t>(batches) != 0)
    throw std::invalid_argument("summarize: values do not split into equal batches");
  const auto n = static_cast<double>(values.size());
  MomentEstimate e;
  e.paths_total = static_cast<long>(values.size());
  const auto spread = [](std::span<const double> xs, double mean) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(xs.size() - 1));
  };
  if (batches == 1) {
    e.mean = pairwise_sum(values) / n;
    e.sd = values.size() > 1 ? spread(values, e.mean) : 0.0;
    e.se = e.sd / std::sqrt(n);
    return e;
  }
  const std::size_t per_batch = values.size() / static_cast<std::size_t>(batches);
  std::vector<double> means(static_cast<std::size_t>(batches));
  for (std::size_t b = 0; b < means.size(); ++b)
    means[b] = pairwise_sum(values.subspan(b * per_batch, per_batch)) / static_cast<double>(per_batch);
  e.mean = pairwise_sum(means) / static_cast<double>(batches);
  e.sd = spread(means, e.mean);
  e.se = e.sd / std::sqrt(static_cast<double>(batches));
  return e;
}

sde::Vector simulate_path(const SimulationPlan& plan, std::uint64_t path) {
  sde::RandomStream rng(plan.seed, path);
  const long steps = plan.steps();
  if (const auto* params = std::get_if<sde::TestSdeParams>(&plan.system)) {
    const sde::TestSystem2 sys(*params);
    Eigen::Vector2d y = plan.y0;
    for (long s = 0; s < steps; ++s) {
      const sde::NoiseDraw d = sde::sample(plan.sampler, rng, plan.h, 2);
      switch (plan.method) {
        case Method::magnus_euler:
          y = sys.magnus_euler(y, plan.h, d.dW(0), d.dW(1));
          break;
        case Method::magnus_milstein:
          y = sys.magnus_milstein(y, plan.h, d.dW(0), d.dW(1), d.levy(0, 1));
          break;
        case Method::classical_milstein:
          y = sys.classical_milstein(y, plan.h, d.dW(0), d.dW(1), d.levy(0, 1));
          break;
      }
    }
    return y;
  }
  const auto& sys = std::get<sde::SemilinearSystem>(plan.system);
  sde::Vector y = plan.y0;
  for (long s = 0; s < steps; ++s) {
    const sde::NoiseDraw d = detail::draw_noise(plan.sampler, rng, plan.h, sys.noise_count());
    switch (plan.method) {
      case Method::magnus_euler:
        y = sde::magnus_euler_step(sys, y, d);
        break;
      case Method::magnus_milstein:
        y = sde::magnus_milstein_step(sys, y, d);
        break;
      case Method::classical_milstein:
        y = sde::classical_milstein_step(sys, y, d);
        break;
    }
  }
  return y;
}

MomentEstimate simulate(const SimulationPlan& plan) {
  plan.validate();
  const auto total = static_cast<std::size_t>(plan.paths) * static_cast<std::size_t>(plan.batches);
  std::vector<double> values(total);
  parallel_for(total, [&](std::size_t i) { values[i] = simulate_path(plan, i).squaredNorm(); });
  return summarize(values, plan.batches);
}

}  // namespace stochmoments::mc
