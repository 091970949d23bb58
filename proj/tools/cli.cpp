#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochmoments/mc.hpp"
#include "stochmoments/moments.hpp"
#include "stochmoments/numkernel/format.hpp"
#include "stochmoments/stability.hpp"

namespace stochmoments::cli {

namespace {

using nlohmann::ordered_json;

struct Common {
  std::string format = "csv";
  std::string output;
  int precision_bits = 256;

  bool json() const { return format == "json"; }
  Precision bits() const { return precision_bits; }
};

// "fourier:<terms>[:notail]" or "subdiv:<substeps>".
sde::SamplerConfig parse_sampler(const std::string& text) {
  sde::SamplerConfig c;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  const auto count = [&](std::size_t i) {
    std::size_t used = 0;
    const int v = std::stoi(parts.at(i), &used);
    if (used != parts[i].size() || v < 1) throw std::invalid_argument("bad count");
    return v;
  };
  try {
    if (parts.size() >= 2 && parts.size() <= 3 && parts[0] == "fourier") {
      c.kind = sde::SamplerConfig::Kind::fourier;
      c.terms = count(1);
      if (parts.size() == 3) {
        if (parts[2] != "notail") throw std::invalid_argument("bad suffix");
        c.tail_correction = false;
      }
      return c;
    }
    if (parts.size() == 2 && parts[0] == "subdiv") {
      c.kind = sde::SamplerConfig::Kind::subdiv;
      c.substeps = count(1);
      return c;
    }
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError("--sampler", "expected fourier:<terms>[:notail] or subdiv:<substeps>, got '" + text + "'");
}

// A step size written as a decimal or as 2^-k.
double parse_step(const std::string& text, const std::string& flag) {
  try {
    std::size_t used = 0;
    double v = 0.0;
    if (text.rfind("2^", 0) == 0) {
      const int e = std::stoi(text.substr(2), &used);
      used += 2;
      v = std::ldexp(1.0, e);
    } else {
      v = std::stod(text, &used);
    }
    if (used == text.size() && v > 0.0 && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(flag, "expected a positive step size or 2^-k, got '" + text + "'");
}

std::string real17(double v) { return format_sci17(v); }

std::string decimal(const Rational& r, Precision bits) { return BigFloat(r, bits).to_round_trip_string(); }

void add_common(CLI::App& app, Common& common) {
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--output", common.output, "Write results to this file instead of stdout");
  app.add_option("--precision-bits", common.precision_bits, "Working precision in bits")
      ->check(CLI::Range(64, 1 << 20));
}

struct TestSystemFlags {
  std::string method = "magnus-milstein";
  double lambda = -0.8;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double t_end = 5.0;
  long paths = 1000;
  int batches = 10;
  std::uint64_t seed = 0;
  std::string sampler = "fourier:16";

  void add(CLI::App& sub) {
    sub.add_option("--method", method, "magnus-euler, magnus-milstein or classical-milstein")
        ->check(CLI::IsMember({"magnus-euler", "magnus-milstein", "classical-milstein"}));
    sub.add_option("--lambda", lambda, "Drift coefficient");
    sub.add_option("--sigma1", sigma1, "First noise coefficient");
    sub.add_option("--sigma2", sigma2, "Second noise coefficient");
    sub.add_option("--t-end", t_end, "Final time")->check(CLI::PositiveNumber);
    sub.add_option("--paths", paths, "Paths per batch")->check(CLI::PositiveNumber);
    sub.add_option("--batches", batches, "Number of batches")->check(CLI::PositiveNumber);
    sub.add_option("--seed", seed, "Random seed");
    sub.add_option("--sampler", sampler, "fourier:<terms>[:notail] or subdiv:<substeps>");
  }

  mc::SimulationPlan plan() const {
    mc::SimulationPlan p;
    p.method = mc::parse_method(method);
    p.system = sde::TestSdeParams{lambda, sigma1, sigma2};
    p.t_end = t_end;
    p.paths = paths;
    p.batches = batches;
    p.seed = seed;
    p.sampler = parse_sampler(sampler);
    return p;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact moments of Wiener increments and Levy areas, Magnus-type integrators and their stability"};
  app.name("stochmoments");
  app.require_subcommand(1);
  Common common;
  add_common(app, common);
  app.fallthrough();

  // The chosen subcommand sets the action that writes its result.
  std::function<void(std::ostream&)> action;

  int n = 0, k = 0, l = 0;
  bool exact = false, as_decimal = false;
  auto* gamma_cmd = app.add_subcommand("gamma", "gamma_{n,k,l} = E[dW1^2n A^2k dW2^2l] on the unit interval");
  gamma_cmd->add_option("--n", n)->required()->check(CLI::NonNegativeNumber);
  gamma_cmd->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);
  gamma_cmd->add_option("--l", l)->required()->check(CLI::NonNegativeNumber);
  auto* exact_flag = gamma_cmd->add_flag("--exact", exact, "Exact rational (default)");
  gamma_cmd->add_flag("--decimal", as_decimal, "Correctly rounded decimal at --precision-bits")->excludes(exact_flag);
  gamma_cmd->callback([&] {
    action = [&](std::ostream& o) {
      const Rational v = moments::gamma(moments::GammaIndex(n, k, l));
      const std::string text = as_decimal ? decimal(v, common.bits()) : v.to_string();
      if (common.json())
        o << ordered_json{{"n", n}, {"k", k}, {"l", l}, {"value", text}}.dump() << '\n';
      else
        o << text << '\n';
    };
  });

  int max_n = 0, max_k = 0, max_l = 0;
  auto* table_cmd = app.add_subcommand("gamma-table", "gamma_{n,k,l} for every index up to the given maxima");
  table_cmd->add_option("--max-n", max_n)->required()->check(CLI::NonNegativeNumber);
  table_cmd->add_option("--max-k", max_k)->required()->check(CLI::NonNegativeNumber);
  table_cmd->add_option("--max-l", max_l)->required()->check(CLI::NonNegativeNumber);
  table_cmd->callback([&] {
    action = [&](std::ostream& o) {
      ordered_json rows = ordered_json::array();
      if (!common.json()) o << "n,k,l,value\n";
      for (int a = 0; a <= max_n; ++a)
        for (int b = 0; b <= max_k; ++b)
          for (int c = 0; c <= max_l; ++c) {
            const std::string v = moments::gamma(moments::GammaIndex(a, b, c)).to_string();
            if (common.json())
              rows.push_back({{"n", a}, {"k", b}, {"l", c}, {"value", v}});
            else
              o << a << ',' << b << ',' << c << ',' << v << '\n';
          }
      if (common.json()) o << ordered_json{{"rows", rows}}.dump(2) << '\n';
    };
  });

  int ma = 0, mb = 0, mc_exp = 1;
  auto* mixed_cmd = app.add_subcommand("mixed-moment", "E[dW1^2a dW2^2b (I12 I21)^c] on the unit interval");
  mixed_cmd->add_option("--a", ma)->required()->check(CLI::NonNegativeNumber);
  mixed_cmd->add_option("--b", mb)->required()->check(CLI::NonNegativeNumber);
  mixed_cmd->add_option("--c", mc_exp)->required()->check(CLI::Range(1, 2));
  mixed_cmd->callback([&] {
    action = [&](std::ostream& o) {
      const std::string v = moments::mixed_moment_I(ma, mb, mc_exp).to_string();
      if (common.json())
        o << ordered_json{{"a", ma}, {"b", mb}, {"c", mc_exp}, {"value", v}}.dump() << '\n';
      else
        o << v << '\n';
    };
  });

  int un_n = 1;
  auto* un_cmd = app.add_subcommand("un-coeffs", "Coefficients of U_n in increasing powers of x");
  un_cmd->add_option("--n", un_n)->required()->check(CLI::PositiveNumber);
  un_cmd->callback([&] {
    action = [&](std::ostream& o) {
      const auto& u = stability::un_coeffs(un_n);
      std::vector<std::string> coeffs;
      for (const auto& c : u.coeffs) coeffs.push_back(c.to_string());
      if (common.json()) {
        o << ordered_json{{"n", un_n}, {"coefficients", coeffs}}.dump() << '\n';
        return;
      }
      for (std::size_t i = 0; i < coeffs.size(); ++i) o << (i ? "," : "") << coeffs[i];
      o << '\n';
    };
  });

  int n_max = 256;
  auto* lyap_cmd = app.add_subcommand("lyapunov", "(1/n) ln|U_n(1)| and the sign of U_n(1) for n = 1..n-max");
  lyap_cmd->add_option("--n-max", n_max)->required()->check(CLI::PositiveNumber);
  lyap_cmd->callback([&] {
    action = [&](std::ostream& o) {
      ordered_json rows = ordered_json::array();
      if (!common.json()) o << "n,value,sign\n";
      for (int i = 1; i <= n_max; ++i) {
        const auto v = stability::lyapunov_un(i, common.bits());
        const std::string text = v.value.to_string(17);
        if (common.json())
          rows.push_back({{"n", i}, {"value", text}, {"sign", v.sign}});
        else
          o << i << ',' << text << ',' << v.sign << '\n';
      }
      if (common.json()) o << ordered_json{{"rows", rows}}.dump(2) << '\n';
    };
  });

  stability::RegionRequest region;
  std::string region_method = "milstein";
  auto* region_cmd = app.add_subcommand("stability-region", "Amplification factor on a (p, q1) grid");
  region_cmd->add_option("--method", region_method)->check(CLI::IsMember({"euler", "milstein"}));
  region_cmd->add_option("--x", region.x, "q2 / q1");
  region_cmd->add_option("--p-min", region.p_min);
  region_cmd->add_option("--p-max", region.p_max);
  region_cmd->add_option("--q-min", region.q_min);
  region_cmd->add_option("--q-max", region.q_max);
  region_cmd->add_option("--grid-p", region.p_points)->check(CLI::Range(2, 100000));
  region_cmd->add_option("--grid-q", region.q_points)->check(CLI::Range(2, 100000));
  region_cmd->add_option("--n-terms", region.n_terms)->check(CLI::PositiveNumber);
  region_cmd->callback([&] {
    action = [&](std::ostream& o) {
      region.method = region_method == "euler" ? stability::Method::euler : stability::Method::milstein;
      const auto grid = stability::region_scan(region, common.bits());
      if (!common.json()) {
        stability::write_region_csv(o, grid);
        return;
      }
      ordered_json rows = ordered_json::array();
      for (const auto& pt : grid.points)
        rows.push_back({{"p", real17(pt.p)},
                        {"q1", real17(pt.q1)},
                        {"x", real17(pt.x)},
                        {"factor", pt.result.factor.to_string(17)},
                        {"converged", pt.result.converged},
                        {"diverging", pt.result.diverging},
                        {"method_stable", pt.result.method_stable()},
                        {"true_stable", pt.result.true_stable}});
      o << ordered_json{{"method", region_method}, {"n_terms", region.n_terms}, {"rows", rows}}.dump(2) << '\n';
    };
  });

  TestSystemFlags sim_flags;
  std::string sim_h = "0.5";
  auto* sim_cmd = app.add_subcommand("simulate", "Batch estimate of E|y(t_end)|^2 for the two-noise test system");
  sim_cmd->set_help_flag("--help", "Print this help message and exit");
  sim_flags.add(*sim_cmd);
  sim_cmd->add_option("--h", sim_h, "Step size (decimal or 2^-k)");
  sim_cmd->callback([&] {
    const double h = parse_step(sim_h, "--h");
    mc::SimulationPlan plan = sim_flags.plan();
    plan.h = h;
    action = [&, plan](std::ostream& o) {
      const mc::MomentEstimate e = mc::simulate(plan);
      if (common.json()) {
        mc::write_json(o, plan, e);
        return;
      }
      o << "key,mean,sd,se,paths_total\n"
        << "second_moment," << real17(e.mean) << ',' << real17(e.sd) << ',' << real17(e.se) << ',' << e.paths_total
        << '\n';
    };
  });

  TestSystemFlags strong_flags;
  strong_flags.lambda = -0.25;
  strong_flags.sigma1 = 0.5;
  strong_flags.sigma2 = 0.4;
  strong_flags.t_end = 1.0;
  strong_flags.batches = 1;
  std::vector<std::string> h_list{"2^-1", "2^-2", "2^-3", "2^-4", "2^-5", "2^-6"};
  std::string ref_h = "2^-9";
  auto* strong_cmd = app.add_subcommand("strong-error", "Mean-square errors against a fine classical Milstein path");
  strong_flags.add(*strong_cmd);
  strong_cmd->add_option("--h-list", h_list, "Comma-separated step sizes")->delimiter(',');
  strong_cmd->add_option("--ref-h", ref_h, "Reference step size");
  strong_cmd->callback([&] {
    std::vector<double> hs;
    for (const auto& s : h_list) hs.push_back(parse_step(s, "--h-list"));
    const double ref = parse_step(ref_h, "--ref-h");
    mc::SimulationPlan plan = strong_flags.plan();
    plan.h = ref;
    action = [&, plan, hs, ref](std::ostream& o) {
      const auto rows = mc::strong_error_table(plan, hs, ref);
      if (common.json())
        mc::write_json(o, plan, rows);
      else
        mc::write_csv(o, rows);
    };
  });

  int en = 0, ek = 0, el = 0, substeps = 1024, est_batches = 10;
  long samples = 100000;
  std::uint64_t est_seed = 0;
  auto* est_cmd = app.add_subcommand("estimate-gamma", "Monte Carlo estimate of gamma_{n,k,l} with a z-score");
  est_cmd->add_option("--n", en)->required()->check(CLI::NonNegativeNumber);
  est_cmd->add_option("--k", ek)->required()->check(CLI::NonNegativeNumber);
  est_cmd->add_option("--l", el)->required()->check(CLI::NonNegativeNumber);
  est_cmd->add_option("--samples", samples)->check(CLI::PositiveNumber);
  est_cmd->add_option("--substeps", substeps)->check(CLI::PositiveNumber);
  est_cmd->add_option("--batches", est_batches)->check(CLI::PositiveNumber);
  est_cmd->add_option("--seed", est_seed);
  est_cmd->callback([&] {
    action = [&](std::ostream& o) {
      sde::SamplerConfig sampler;
      sampler.kind = sde::SamplerConfig::Kind::subdiv;
      sampler.substeps = substeps;
      const moments::GammaIndex idx(en, ek, el);
      const mc::MomentEstimate e = mc::estimate_gamma_mc(idx, samples, sampler, est_seed, est_batches);
      const Rational exact_value = moments::gamma(idx);
      const double z = (e.mean - exact_value.to_double()) / e.se;
      if (common.json()) {
        o << ordered_json{{"n", en},
                          {"k", ek},
                          {"l", el},
                          {"mean", real17(e.mean)},
                          {"sd", real17(e.sd)},
                          {"se", real17(e.se)},
                          {"paths_total", e.paths_total},
                          {"exact", exact_value.to_string()},
                          {"z", real17(z)}}
                 .dump(2)
          << '\n';
        return;
      }
      o << "n,k,l,mean,sd,se,paths_total,exact,z\n"
        << en << ',' << ek << ',' << el << ',' << real17(e.mean) << ',' << real17(e.sd) << ',' << real17(e.se) << ','
        << e.paths_total << ',' << exact_value.to_string() << ',' << real17(z) << '\n';
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::ostringstream buffer;
    action(buffer);
    if (common.output.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(common.output, std::ios::binary);
      if (!file) {
        err << "usage error: --output: cannot open '" << common.output << "'\n";
        return 2;
      }
      file << buffer.str();
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace stochmoments::cli
