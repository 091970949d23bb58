#include <ostream>

#include <json.hpp>

#include "stochmoments/mc.hpp"
#include "stochmoments/numkernel/format.hpp"

namespace stochmoments::mc {

namespace {

using nlohmann::ordered_json;

ordered_json real(double v) { return format_sci17(v); }

ordered_json plan_json(const SimulationPlan& plan) {
  ordered_json j;
  j["method"] = to_string(plan.method);
  if (const auto* p = std::get_if<sde::TestSdeParams>(&plan.system)) {
    j["system"] = {{"kind", "test"}, {"lambda", real(p->lambda)}, {"sigma1", real(p->sigma1)}, {"sigma2", real(p->sigma2)}};
  } else {
    j["system"] = {{"kind", "semilinear"}, {"dimension", plan.dimension()}, {"noises", plan.noise_count()}};
  }
  ordered_json y0 = ordered_json::array();
  for (Eigen::Index i = 0; i < plan.y0.size(); ++i) y0.push_back(real(plan.y0(i)));
  j["y0"] = y0;
  j["h"] = real(plan.h);
  j["t_end"] = real(plan.t_end);
  j["paths"] = plan.paths;
  j["batches"] = plan.batches;
  j["seed"] = plan.seed;
  if (plan.sampler.kind == sde::SamplerConfig::Kind::subdiv)
    j["sampler"] = {{"kind", "subdiv"}, {"substeps", plan.sampler.substeps}};
  else
    j["sampler"] = {{"kind", "fourier"}, {"terms", plan.sampler.terms}, {"tail", plan.sampler.tail_correction}};
  return j;
}

ordered_json estimate_json(const std::string& key, const MomentEstimate& e) {
  return {{"key", key}, {"mean", real(e.mean)}, {"sd", real(e.sd)}, {"se", real(e.se)}, {"paths_total", e.paths_total}};
}

void emit(std::ostream& out, const SimulationPlan& plan, ordered_json rows) {
  ordered_json doc;
  doc["plan"] = plan_json(plan);
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SecondMomentRow>& rows) {
  out << "key,mean,sd,se,paths_total,predicted,rare_event_warning\n";
  for (const auto& r : rows) {
    out << r.key << ',' << format_sci17(r.estimate.mean) << ',' << format_sci17(r.estimate.sd) << ','
        << format_sci17(r.estimate.se) << ',' << r.estimate.paths_total << ','
        << (r.predicted ? format_sci17(*r.predicted) : "") << ',' << r.rare_event_warning << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<StrongErrorRow>& rows) {
  out << "h,log2_error,log2_norm_per_path,mean,sd,se,paths_total\n";
  for (const auto& r : rows) {
    out << format_double(r.h) << ',' << format_sci17(r.log2_error) << ',' << format_sci17(r.log2_norm_per_path) << ','
        << format_sci17(r.mean_square.mean) << ',' << format_sci17(r.mean_square.sd) << ',' << format_sci17(r.mean_square.se) << ','
        << r.mean_square.paths_total << '\n';
  }
}

void write_json(std::ostream& out, const SimulationPlan& plan, const std::vector<SecondMomentRow>& rows) {
  ordered_json list = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row = estimate_json(r.key, r.estimate);
    if (r.predicted) row["predicted"] = real(*r.predicted);
    row["rare_event_warning"] = r.rare_event_warning;
    list.push_back(std::move(row));
  }
  emit(out, plan, std::move(list));
}

void write_json(std::ostream& out, const SimulationPlan& plan, const std::vector<StrongErrorRow>& rows) {
  ordered_json list = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row = estimate_json(format_double(r.h), r.mean_square);
    row["log2_error"] = real(r.log2_error);
    row["log2_norm_per_path"] = real(r.log2_norm_per_path);
    list.push_back(std::move(row));
  }
  emit(out, plan, std::move(list));
}

void write_json(std::ostream& out, const SimulationPlan& plan, const MomentEstimate& estimate) {
  emit(out, plan, ordered_json::array({estimate_json("second_moment", estimate)}));
}

}  // namespace stochmoments::mc
