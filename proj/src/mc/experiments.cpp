#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "internal.hpp"
#include "stochmoments/mc.hpp"
#include "stochmoments/numkernel/format.hpp"
#include "stochmoments/numkernel/parallel.hpp"
#include "stochmoments/stability.hpp"

namespace stochmoments::mc {

namespace {

constexpr double kRatioTolerance = 1e-9;

long whole_ratio(double numerator, double denominator, const std::string& what) {
  const double r = numerator / denominator;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > kRatioTolerance * r)
    throw std::invalid_argument(what + ": " + format_double(denominator) + " does not divide " + format_double(numerator));
  return n;
}

bool same_except_lambda(const SimulationPlan& a, const SimulationPlan& b) {
  const auto& pa = std::get<sde::TestSdeParams>(a.system);
  const auto& pb = std::get<sde::TestSdeParams>(b.system);
  return a.method == b.method && a.h == b.h && a.t_end == b.t_end && a.paths == b.paths && a.batches == b.batches &&
         a.seed == b.seed && a.y0 == b.y0 && pa.sigma1 == pb.sigma1 && pa.sigma2 == pb.sigma2 &&
         a.sampler.kind == b.sampler.kind && a.sampler.substeps == b.sampler.substeps &&
         a.sampler.terms == b.sampler.terms && a.sampler.tail_correction == b.sampler.tail_correction;
}

// Amplification factor of a Magnus method on the test system; the factor is
// symmetric under exchanging the noises, so q1 is taken from the larger one.
std::optional<stability::AmplificationResult> amplification(const SimulationPlan& plan) {
  const auto* params = std::get_if<sde::TestSdeParams>(&plan.system);
  if (params == nullptr || plan.method == Method::classical_milstein) return std::nullopt;
  const double v1 = params->sigma1 * params->sigma1, v2 = params->sigma2 * params->sigma2;
  const stability::StabilityParams sp{params->lambda * plan.h, std::max(v1, v2) * plan.h, std::min(v1, v2) / std::max(v1, v2),
                                      stability::kDefaultTerms};
  return plan.method == Method::magnus_euler ? stability::euler_factor(sp) : stability::milstein_factor(sp);
}

}  // namespace

std::vector<SecondMomentRow> second_moment_table(const std::vector<SimulationPlan>& plans) {
  const SimulationPlan* first_test = nullptr;
  for (const auto& plan : plans) {
    plan.validate();
    if (!std::holds_alternative<sde::TestSdeParams>(plan.system)) continue;
    if (first_test == nullptr)
      first_test = &plan;
    else if (!same_except_lambda(*first_test, plan))
      throw std::invalid_argument("second_moment_table: test-system plans must differ only in lambda");
  }
  std::vector<SecondMomentRow> rows;
  rows.reserve(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& plan = plans[i];
    SecondMomentRow row;
    if (const auto* p = std::get_if<sde::TestSdeParams>(&plan.system))
      row.key = format_double(p->lambda);
    else
      row.key = "plan" + std::to_string(i);
    row.estimate = simulate(plan);
    if (const auto amp = amplification(plan)) {
      const double start = plan.y0.squaredNorm();
      row.predicted = std::pow(amp->factor.to_double(), static_cast<double>(plan.steps())) * start;
      row.rare_event_warning = (amp->diverging || !amp->method_stable()) && row.estimate.mean < start;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<StrongErrorRow> strong_error_table(const SimulationPlan& plan, const std::vector<double>& h_list,
                                               double reference_h) {
  SimulationPlan reference = plan;
  reference.h = reference_h;
  reference.validate();
  if (h_list.empty()) throw std::invalid_argument("strong_error_table: empty step list");
  std::vector<long> ratios;
  for (const double h : h_list) {
    SimulationPlan coarse = plan;
    coarse.h = h;
    coarse.validate();
    ratios.push_back(whole_ratio(h, reference_h, "strong_error_table"));
  }
  const sde::SemilinearSystem sys = std::holds_alternative<sde::TestSdeParams>(plan.system)
                                        ? sde::test_system(std::get<sde::TestSdeParams>(plan.system))
                                        : std::get<sde::SemilinearSystem>(plan.system);
  const long fine_steps = reference.steps();
  const auto total = static_cast<std::size_t>(plan.paths) * static_cast<std::size_t>(plan.batches);
  std::vector<std::vector<double>> errors(h_list.size(), std::vector<double>(total));

  parallel_for(total, [&](std::size_t path) {
    sde::RandomStream rng(plan.seed, path);
    std::vector<sde::NoiseDraw> fine;
    fine.reserve(static_cast<std::size_t>(fine_steps));
    for (long s = 0; s < fine_steps; ++s) fine.push_back(detail::draw_noise(plan.sampler, rng, reference_h, sys.noise_count()));
    sde::Vector ref = plan.y0;
    for (const auto& d : fine) ref = sde::classical_milstein_step(sys, ref, d);
    for (std::size_t c = 0; c < h_list.size(); ++c) {
      const auto ratio = static_cast<std::size_t>(ratios[c]);
      sde::Vector y = plan.y0;
      for (std::size_t s = 0; s < fine.size(); s += ratio) {
        sde::NoiseDraw d = fine[s];
        for (std::size_t k = 1; k < ratio; ++k) d = sde::concatenate(d, fine[s + k]);
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
      errors[c][path] = (y - ref).squaredNorm();
    }
  });

  std::vector<StrongErrorRow> rows;
  for (std::size_t c = 0; c < h_list.size(); ++c) {
    StrongErrorRow row;
    row.h = h_list[c];
    row.mean_square = summarize(errors[c], plan.batches);
    row.log2_error = std::log2(row.mean_square.mean);
    row.log2_norm_per_path = 0.5 * (row.log2_error - std::log2(static_cast<double>(row.mean_square.paths_total)));
    rows.push_back(row);
  }
  return rows;
}

std::vector<MomentEstimate> estimate_gamma_mc(const std::vector<moments::GammaIndex>& indices, long samples,
                                              const sde::SamplerConfig& sampler, std::uint64_t seed, int batches) {
  sampler.validate();
  if (samples < 1) throw std::invalid_argument("estimate_gamma_mc: samples must be positive");
  if (batches < 1 || samples % batches != 0)
    throw std::invalid_argument("estimate_gamma_mc: samples must split into equal batches");
  for (const auto& idx : indices)
    if (idx.n < 0 || idx.k < 0 || idx.l < 0) throw std::invalid_argument("estimate_gamma_mc: negative index");
  const auto total = static_cast<std::size_t>(samples);
  std::vector<std::vector<double>> values(indices.size(), std::vector<double>(total));
  parallel_for(total, [&](std::size_t i) {
    sde::RandomStream rng(seed, i);
    const sde::NoiseDraw d = sde::sample(sampler, rng, 1.0, 2);
    const double w1 = d.dW(0) * d.dW(0), a = d.levy(0, 1) * d.levy(0, 1), w2 = d.dW(1) * d.dW(1);
    for (std::size_t j = 0; j < indices.size(); ++j)
      values[j][i] = std::pow(w1, indices[j].n) * std::pow(a, indices[j].k) * std::pow(w2, indices[j].l);
  });
  std::vector<MomentEstimate> out;
  out.reserve(indices.size());
  for (const auto& v : values) out.push_back(summarize(v, batches));
  return out;
}

MomentEstimate estimate_gamma_mc(const moments::GammaIndex& index, long samples, const sde::SamplerConfig& sampler,
                                 std::uint64_t seed, int batches) {
  return estimate_gamma_mc(std::vector<moments::GammaIndex>{index}, samples, sampler, seed, batches).front();
}

double fit_order(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("fit_order: need at least 2 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [h, v] : points) {
    if (!(h > 0.0) || !(v > 0.0)) throw std::domain_error("fit_order: step sizes and values must be positive");
    sx += std::log2(h);
    sy += std::log2(v);
  }
  const auto n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [h, v] : points) {
    const double dx = std::log2(h) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log2(v) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_order: step sizes must not all be equal");
  return sxy / sxx;
}

}  // namespace stochmoments::mc
