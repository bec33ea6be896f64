// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gapdg/analysis.hpp"
#include "gapdg/assembly.hpp"
#include "gapdg/cases.hpp"
#include "gapdg/geometry_io.hpp"
#include "gapdg/linalg.hpp"

namespace gapdg {

/// Malformed run configuration or command line.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  std::string case_id;
  double gamma = 0.0;
  bool has_lambda = false;
  double lambda = 1.0;
  std::vector<double> dg_schedule;  // per-level explicit gap sizes
  int level_min = 1;
  int level_max = 5;
  int degree = 2;
  double penalty_mu = 0.0;  // 0 -> default 2 (k+1)^2
  SolveMethod method = SolveMethod::direct_lu;
  double tol = 1e-10;
  int quad_n = 0;  // 0 -> default k+2
  std::string out_dir = "out";
  bool dump_matrix = false;
  std::string domain_file;  // optional custom geometry (fixed gap, refined per level)
};

inline void validate_config(const RunConfig& cfg) {
  if (cfg.case_id.empty()) throw ConfigError("missing case id");
  case_dimension(cfg.case_id);
  if (cfg.level_min > cfg.level_max || cfg.level_min < 0)
    throw ConfigError("bad level range");
  if (cfg.degree < 1) throw ConfigError("degree must be >= 1");
  if (cfg.has_lambda && !cfg.dg_schedule.empty())
    throw ConfigError("lambda and dg-schedule are mutually exclusive");
  if (!cfg.dg_schedule.empty() &&
      static_cast<int>(cfg.dg_schedule.size()) != cfg.level_max - cfg.level_min + 1)
    throw ConfigError("dg-schedule length must match the level range");
  if (cfg.penalty_mu != 0.0 && cfg.penalty_mu < 1.0)
    throw ConfigError("penalty must be >= 1");
  if (cfg.quad_n < 0 || cfg.quad_n > 10) throw ConfigError("quad out of range");
  if (cfg.case_id == "ex3" && cfg.gamma <= 0) throw ConfigError("ex3 requires gamma > 0");
}

/// Flat key = value configuration file; '#' starts a comment.
inline RunConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "case") {
        cfg.case_id = value;
      } else if (key == "gamma") {
        cfg.gamma = std::stod(value);
      } else if (key == "lambda") {
        cfg.lambda = std::stod(value);
        cfg.has_lambda = true;
      } else if (key == "dg_schedule") {
        std::istringstream vs(value);
        std::string tok;
        while (std::getline(vs, tok, ',')) cfg.dg_schedule.push_back(std::stod(tok));
      } else if (key == "levels") {
        const auto colon = value.find(':');
        if (colon == std::string::npos) throw ConfigError("levels must be A:B");
        cfg.level_min = std::stoi(value.substr(0, colon));
        cfg.level_max = std::stoi(value.substr(colon + 1));
      } else if (key == "degree") {
        cfg.degree = std::stoi(value);
      } else if (key == "penalty") {
        cfg.penalty_mu = std::stod(value);
      } else if (key == "solver") {
        if (value == "lu") cfg.method = SolveMethod::direct_lu;
        else if (value == "gmres") cfg.method = SolveMethod::gmres;
        else throw ConfigError("unknown solver: " + value);
      } else if (key == "tol") {
        cfg.tol = std::stod(value);
      } else if (key == "quad") {
        cfg.quad_n = std::stoi(value);
      } else if (key == "out") {
        cfg.out_dir = value;
      } else if (key == "dump_matrix") {
        cfg.dump_matrix = value == "true" || value == "1";
      } else if (key == "domain_file") {
        cfg.domain_file = value;
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("config line " + std::to_string(lineno) + ": malformed value");
    }
  }
  return cfg;
}

struct ConvergenceRow {
  int level = 0;
  double h = 0;
  double dg = 0;
  double dg_error = 0;
  double l2_error = 0;
  double rate = std::numeric_limits<double>::quiet_NaN();
  double predicted = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;

  /// Mean of the last two level-to-level rates (the asymptotic read-off).
  double asymptotic_rate() const {
    std::vector<double> r;
    for (const auto& row : rows)
      if (std::isfinite(row.rate)) r.push_back(row.rate);
    if (r.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (r.size() == 1) return r.back();
    return 0.5 * (r[r.size() - 2] + r[r.size() - 1]);
  }
};

namespace detail {

inline std::string csv_cell(double v) { return std::isfinite(v) ? fmt_double(v) : ""; }

template <int D>
BuiltCase<D> build_level(const RunConfig& cfg, int level, double dg_explicit,
                         bool use_schedule) {
  if (!cfg.domain_file.empty()) {
    // custom geometry: fixed gap from the file, refined dyadically per level
    MultiPatchDomain<D> dom = read_domain<D>(cfg.domain_file);
    auto refine_patch = [&](const PatchMap<D>& p) {
      std::array<KnotVector, D> kvs = uniform_directions<D>(p.basis().direction(0));
      for (int d = 0; d < D; ++d) kvs[d] = p.basis().direction(d);
      std::vector<Vec<D>> net = p.control_points();
      refine_grid_dyadic<D>(kvs, net, level);
      return PatchMap<D>(TensorBasis<D>(std::move(kvs)), std::move(net), p.label());
    };
    MultiPatchDomain<D> refined{refine_patch(dom.left), refine_patch(dom.right), dom.gap,
                                dom.boundary};
    ProblemCase<D> pc = case_by_id<D>(cfg.case_id, cfg.gamma);
    const double h = std::max(refined.left.basis().mesh_size(),
                              refined.right.basis().mesh_size());
    return {std::move(refined), std::move(pc), h, dom.gap.d_g};
  }
  GapSpec gap;
  if (use_schedule) {
    gap.explicit_dg = true;
    gap.dg = dg_explicit;
  } else {
    gap.lambda = cfg.lambda;
  }
  return build_case<D>(cfg.case_id, level, gap, cfg.gamma);
}

}  // namespace detail

/// Run the refinement study: per level build, assemble, solve, measure;
/// then write errors.csv, report.md and rates.json into the output
/// directory (and the final system in MatrixMarket form when requested).
template <int D>
ConvergenceTable run_study(const RunConfig& cfg) {
  validate_config(cfg);
  const bool use_schedule = !cfg.dg_schedule.empty();
  const PenaltyConfig penalty{cfg.penalty_mu > 0 ? cfg.penalty_mu
                                                 : PenaltyConfig::for_degree(cfg.degree).mu};

  ConvergenceTable table;
  RatePrediction pred;
  bool have_pred = false;
  std::string pred_note;

  for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
    const double dg_explicit =
        use_schedule ? cfg.dg_schedule[level - cfg.level_min] : 0.0;
    BuiltCase<D> built = detail::build_level<D>(cfg, level, dg_explicit, use_schedule);
    Discretization<D> disc =
        make_discretization<D>(std::move(built.domain), cfg.degree, cfg.quad_n);

    const auto sys = assemble_system(disc, built.problem.coeffs, penalty,
                                     built.problem.source, built.problem.dirichlet);
    const std::vector<double> u_h = solve(sys.matrix, sys.rhs, cfg.method, cfg.tol);
    const ErrorBreakdown eb = dg_error<D>(disc, u_h, built.problem.exact,
                                          built.problem.exact_grad, built.problem.coeffs);

    ConvergenceRow row;
    row.level = level;
    row.h = built.h;
    row.dg = built.d_g;
    row.dg_error = eb.dg_total;
    row.l2_error = eb.l2_total;
    // per-row prediction from the effective gap exponent
    const double lam_eff = built.d_g > 0 ? std::log(built.d_g) / std::log(built.h)
                                         : std::numeric_limits<double>::infinity();
    try {
      if (built.d_g == 0.0) {
        const RatePrediction p0 = predict_orders(1.0, built.problem.sobolev_p, D,
                                                 built.problem.sobolev_l);
        row.predicted = std::min(p0.delta_pi, static_cast<double>(cfg.degree));
      } else {
        const RatePrediction p =
            predict_orders(lam_eff, built.problem.sobolev_p, D, built.problem.sobolev_l);
        row.predicted = p.predicted_rate(cfg.degree);
        if (!have_pred || level == cfg.level_max) {
          pred = p;
          have_pred = true;
        }
      }
    } catch (const std::invalid_argument&) {
      // effective exponent outside the admissible range; no prediction
    }
    table.rows.push_back(row);

    if (cfg.dump_matrix && level == cfg.level_max) {
      std::filesystem::create_directories(cfg.out_dir);
      write_matrix_market(cfg.out_dir + "/system.mtx", sys.matrix);
    }
  }

  std::vector<double> errs, hs;
  for (const auto& r : table.rows) {
    errs.push_back(r.dg_error);
    hs.push_back(r.h);
  }
  if (table.rows.size() > 1) {
    const auto rates = observed_rates(errs, hs);
    for (std::size_t i = 0; i < rates.size(); ++i) table.rows[i].rate = rates[i];
  }

  std::filesystem::create_directories(cfg.out_dir);

  {  // errors.csv
    std::ofstream os(cfg.out_dir + "/errors.csv");
    os << "level,h,dg,dg_error,l2_error,rate,predicted_rate\n";
    for (const auto& r : table.rows)
      os << r.level << "," << detail::fmt_double(r.h) << "," << detail::fmt_double(r.dg)
         << "," << detail::fmt_double(r.dg_error) << "," << detail::fmt_double(r.l2_error)
         << "," << detail::csv_cell(r.rate) << "," << detail::csv_cell(r.predicted)
         << "\n";
  }

  {  // report.md, same formatting as the csv (single source of truth)
    std::ofstream os(cfg.out_dir + "/report.md");
    os << "# Convergence study: " << cfg.case_id << "\n\n";
    os << "- degree: " << cfg.degree << "\n";
    if (cfg.case_id == "ex3") os << "- gamma: " << detail::fmt_double(cfg.gamma) << "\n";
    if (use_schedule) {
      os << "- gap sizes: explicit per-level schedule\n";
    } else if (cfg.domain_file.empty()) {
      os << "- gap law: dg = h^" << detail::fmt_double(cfg.lambda) << "\n";
    } else {
      os << "- geometry: " << cfg.domain_file << " (fixed gap)\n";
    }
    os << "- penalty mu: " << detail::fmt_double(penalty.mu) << "\n";
    os << "- solver: " << (cfg.method == SolveMethod::direct_lu ? "lu" : "gmres") << "\n";
    os << "- gap-region coefficient: follows the right patch (rho_g = rho_r)\n\n";
    if (have_pred) {
      os << "Predicted orders: beta = " << detail::fmt_double(pred.beta)
         << ", delta_pi = " << detail::fmt_double(pred.delta_pi)
         << ", expected rate = " << detail::fmt_double(pred.predicted_rate(cfg.degree))
         << "\n\n";
    }
    os << "| level | h | dg | dg_error | l2_error | rate | predicted_rate |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : table.rows)
      os << "| " << r.level << " | " << detail::fmt_double(r.h) << " | "
         << detail::fmt_double(r.dg) << " | " << detail::fmt_double(r.dg_error) << " | "
         << detail::fmt_double(r.l2_error) << " | " << detail::csv_cell(r.rate) << " | "
         << detail::csv_cell(r.predicted) << " |\n";
    os << "\nAsymptotic rate (mean of last two): "
       << detail::csv_cell(table.asymptotic_rate()) << "\n";
  }

  {  // rates.json
    nlohmann::json j;
    j["case"] = cfg.case_id;
    if (cfg.case_id == "ex3") j["gamma"] = cfg.gamma;
    j["degree"] = cfg.degree;
    j["penalty_mu"] = penalty.mu;
    if (!use_schedule && cfg.domain_file.empty()) j["lambda"] = cfg.lambda;
    j["levels"] = nlohmann::json::array();
    for (const auto& r : table.rows) {
      nlohmann::json row;
      row["level"] = r.level;
      row["h"] = r.h;
      row["dg"] = r.dg;
      row["dg_error"] = r.dg_error;
      row["l2_error"] = r.l2_error;
      if (std::isfinite(r.rate)) row["rate"] = r.rate;
      if (std::isfinite(r.predicted)) row["predicted_rate"] = r.predicted;
      j["levels"].push_back(row);
    }
    if (std::isfinite(table.asymptotic_rate()))
      j["asymptotic_rate"] = table.asymptotic_rate();
    if (have_pred) {
      j["predicted"] = {{"beta", pred.beta},
                        {"delta_pi", pred.delta_pi},
                        {"rate", pred.predicted_rate(cfg.degree)}};
    }
    std::ofstream os(cfg.out_dir + "/rates.json");
    os << j.dump(2) << "\n";
  }

  return table;
}

/// Dimension dispatch on the case id (or custom geometry file).
inline ConvergenceTable run_study_any(const RunConfig& cfg) {
  const int dim =
      cfg.domain_file.empty() ? case_dimension(cfg.case_id) : domain_file_dimension(cfg.domain_file);
  return dim == 2 ? run_study<2>(cfg) : run_study<3>(cfg);
}

}  // namespace gapdg
