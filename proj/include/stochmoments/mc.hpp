#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "stochmoments/moments.hpp"
#include "stochmoments/sde.hpp"

/// Monte Carlo harness: second-moment tables, strong-error tables, moment
/// estimates with batch standard errors, and order fitting.
///
/// Path i of a plan always draws from RandomStream(seed, i), and every reduction
/// is a fixed-order pairwise sum, so results are bit-identical for any worker count.
namespace stochmoments::mc {

enum class Method { magnus_euler, magnus_milstein, classical_milstein };

std::string to_string(Method method);
/// Accepts the names produced by to_string. Throws std::invalid_argument otherwise.
Method parse_method(std::string_view name);

struct SimulationPlan {
  Method method = Method::magnus_milstein;
  std::variant<sde::TestSdeParams, sde::SemilinearSystem> system = sde::TestSdeParams{};
  sde::Vector y0 = sde::Vector::Ones(2);
  double h = 0.5;
  double t_end = 5.0;
  long paths = 1000;  ///< per batch
  int batches = 1;
  std::uint64_t seed = 0;
  sde::SamplerConfig sampler;

  int dimension() const;
  int noise_count() const;
  /// t_end / h; valid only after validate().
  long steps() const;

  /// Throws std::invalid_argument unless 0 < h < 1, t_end / h is a whole
  /// number of steps, paths and batches are positive, and y0 matches the system.
  void validate() const;
};

struct MomentEstimate {
  double mean = 0.0;
  double sd = 0.0;  ///< across batch means; per-sample SD when batches = 1
  double se = 0.0;  ///< sd / sqrt(batches); sd / sqrt(paths_total) when batches = 1
  long paths_total = 0;
};

/// Pairwise sum in a fixed order.
double pairwise_sum(std::span<const double> values);

/// Splits values into `batches` consecutive equal batches. Throws
/// std::invalid_argument when the split is uneven or values is empty.
MomentEstimate summarize(std::span<const double> values, int batches);

/// State at t_end of path `path`.
sde::Vector simulate_path(const SimulationPlan& plan, std::uint64_t path);

/// Estimate of E|y(t_end)|^2 over paths * batches paths.
MomentEstimate simulate(const SimulationPlan& plan);

struct SecondMomentRow {
  std::string key;
  MomentEstimate estimate;
  /// factor^steps |y0|^2 from the exact amplification factor (test system with
  /// a Magnus method only).
  std::optional<double> predicted;
  /// Set when the amplification series diverges or exceeds 1 while the sample
  /// mean stays below |y0|^2: the blow-up is carried by rare paths the sample missed.
  bool rare_event_warning = false;
};

/// One row per plan. Test-system plans must agree in everything except lambda;
/// their key is lambda, other keys are "plan<i>". Throws std::invalid_argument
/// otherwise.
std::vector<SecondMomentRow> second_moment_table(const std::vector<SimulationPlan>& plans);

struct StrongErrorRow {
  double h = 0.0;
  MomentEstimate mean_square;  ///< of |y_n - y_ref|^2 at t_end
  double log2_error = 0.0;     ///< log2 of mean_square.mean
  /// log2(|e| / N) for the stacked error vector e of all N paths, i.e.
  /// (log2_error - log2 N) / 2.
  double log2_norm_per_path = 0.0;
};

/// Errors of plan.method at each h against classical Milstein at reference_h on
/// the same path; coarse noise is the Chen concatenation of the reference draws.
/// plan.h is ignored. Throws std::invalid_argument when reference_h does not
/// divide some h or t_end.
std::vector<StrongErrorRow> strong_error_table(const SimulationPlan& plan, const std::vector<double>& h_list,
                                               double reference_h);

/// Unit-interval estimate of E[dW1^2n A^2k dW2^2l] from `samples` draws of the
/// sampler split into `batches`. Sample i draws from RandomStream(seed, i).
MomentEstimate estimate_gamma_mc(const moments::GammaIndex& index, long samples, const sde::SamplerConfig& sampler,
                                 std::uint64_t seed = 0, int batches = 10);
/// Several indices from the same draws.
std::vector<MomentEstimate> estimate_gamma_mc(const std::vector<moments::GammaIndex>& indices, long samples,
                                              const sde::SamplerConfig& sampler, std::uint64_t seed = 0,
                                              int batches = 10);

/// Least-squares slope of log2(value) against log2(h). Throws
/// std::invalid_argument for fewer than 2 points or equal h, std::domain_error
/// for nonpositive entries.
double fit_order(const std::vector<std::pair<double, double>>& points);

void write_csv(std::ostream& out, const std::vector<SecondMomentRow>& rows);
void write_csv(std::ostream& out, const std::vector<StrongErrorRow>& rows);
/// {plan, rows: [{key, mean, sd, se, ...}]}; reals are 17-significant-digit strings.
void write_json(std::ostream& out, const SimulationPlan& plan, const std::vector<SecondMomentRow>& rows);
void write_json(std::ostream& out, const SimulationPlan& plan, const std::vector<StrongErrorRow>& rows);
void write_json(std::ostream& out, const SimulationPlan& plan, const MomentEstimate& estimate);

}  // namespace stochmoments::mc
