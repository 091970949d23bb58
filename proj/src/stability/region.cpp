#include <cmath>
#include <ostream>
#include <stdexcept>

#include "stochmoments/numkernel/format.hpp"
#include "stochmoments/numkernel/parallel.hpp"
#include "stochmoments/stability.hpp"

namespace stochmoments::stability {

void RegionRequest::validate() const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("region: x must lie in [0, 1]");
  if (!(p_min < p_max)) throw std::domain_error("region: empty p range");
  if (!(q_min > 0.0)) throw std::domain_error("region: q_min must be positive");
  if (!(q_min < q_max)) throw std::domain_error("region: empty q range");
  if (p_points < 2 || q_points < 2) throw std::domain_error("region: need at least 2 points per axis");
  if (n_terms < 1) throw std::domain_error("region: n_terms must be at least 1");
}

RegionGrid region_scan(const RegionRequest& request, Precision bits) {
  request.validate();
  RegionGrid grid;
  grid.request = request;
  const auto np = static_cast<std::size_t>(request.p_points);
  const auto nq = static_cast<std::size_t>(request.q_points);
  grid.points.resize(np * nq);
  for (std::size_t iq = 0; iq < nq; ++iq)
    for (std::size_t ip = 0; ip < np; ++ip) {
      auto& pt = grid.points[iq * np + ip];
      pt.p = request.p_min + (request.p_max - request.p_min) * static_cast<double>(ip) / static_cast<double>(np - 1);
      pt.q1 = request.q_min + (request.q_max - request.q_min) * static_cast<double>(iq) / static_cast<double>(nq - 1);
      pt.x = request.x;
    }

  // Warm the per-x series cache once so workers only read it.
  const StabilityParams warm{request.p_min, request.q_min, request.x, request.n_terms};
  if (request.method == Method::milstein)
    milstein_factor(warm, bits);
  else
    euler_factor(warm, bits);

  parallel_for(grid.points.size(), [&](std::size_t i) {
    auto& pt = grid.points[i];
    const StabilityParams params{pt.p, pt.q1, pt.x, request.n_terms};
    pt.result = request.method == Method::milstein ? milstein_factor(params, bits) : euler_factor(params, bits);
  });
  return grid;
}

void write_region_csv(std::ostream& out, const RegionGrid& grid) {
  out << "p,q1,x,factor,converged,diverging,method_stable,true_stable\n";
  for (const auto& pt : grid.points) {
    out << format_double(pt.p) << ',' << format_double(pt.q1) << ',' << format_double(pt.x) << ','
        << pt.result.factor.to_string(17) << ',' << pt.result.converged << ',' << pt.result.diverging << ','
        << pt.result.method_stable() << ',' << pt.result.true_stable << '\n';
  }
}

}  // namespace stochmoments::stability
