#include "capdual/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "capdual/apriori.hpp"
#include "capdual/errors.hpp"

namespace capdual {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "capdual-solution";

std::string stem_path(const std::string& config_path, const char* suffix) {
  const std::filesystem::path p(config_path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string format_line(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

}  // namespace

ordered_json solution_json(const RunConfig& cfg, const PolarGrid& grid, const ContinuationResult& result) {
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = 1;
  j["config"] = cfg.to_json();
  ordered_json g;
  g["n"] = grid.spec().n();
  g["theta"] = grid.spec().theta();
  g["nr"] = grid.nr();
  g["nphi"] = grid.nphi();
  g["dr"] = grid.dr();
  g["dphi"] = grid.dphi();
  g["spacing"] = grid.spacing();
  g["r"] = grid.r_nodes();
  g["phi"] = grid.phi_nodes();
  j["grid"] = std::move(g);
  j["status"] = to_string(result.report.status);
  j["t_reached"] = result.report.t_reached;
  j["final_residual"] = result.report.final_residual;
  ScalarField h(result.v.size());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = std::exp(result.v[k]);
  j["h"] = h;
  j["log_h"] = {{"ring_base", result.state.ring_base()}, {"deviation", result.state.deviation()}};
  return j;
}

LoadedSolution load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open solution file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("solution file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormat) {
    throw ConfigError("'" + path + "' is not a capdual solution file");
  }
  if (!j.contains("config") || !j.contains("h")) throw ConfigError("solution file lacks config or h");

  auto config = RunConfig::from_json(j.at("config"));
  auto problem = config.problem();
  ScalarField h;
  try {
    h = j.at("h").get<ScalarField>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solution values: ") + e.what());
  }
  if (h.size() != problem.grid->size()) throw ConfigError("solution has " + std::to_string(h.size()) +
                                                          " values but the grid has " +
                                                          std::to_string(problem.grid->size()) + " nodes");
  std::optional<SupportField> support;
  try {
    support.emplace(problem.grid, h);
  } catch (const Error& e) {
    throw ConfigError(std::string("solution values: ") + e.what());
  }

  LoadedSolution out{std::move(config), problem, std::move(*support), std::nullopt,
                     j.value("final_residual", std::numeric_limits<double>::quiet_NaN())};

  if (j.contains("log_h")) {
    try {
      auto base = j.at("log_h").at("ring_base").get<std::vector<double>>();
      auto dev = j.at("log_h").at("deviation").get<ScalarField>();
      RingSplitField v(problem.grid->nphi(), std::move(base), std::move(dev));
      bool consistent = v.size() == h.size();
      for (std::size_t k = 0; consistent && k < h.size(); ++k) {
        consistent = std::abs(std::exp(v[k]) - h[k]) <= 1e-12 * h[k];
      }
      if (consistent) out.log_h = std::move(v);
    } catch (const std::exception&) {
      // fall back to log h
    }
  }
  return out;
}

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  ProblemSpec prob;
  try {
    cfg = RunConfig::load(opts.config_path);
    prob = cfg.problem();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  const std::string solution_path = !opts.solution_path.empty()      ? opts.solution_path
                                    : !cfg.output.solution.empty() ? cfg.output.solution
                                                                   : stem_path(opts.config_path, "_solution.json");
  const std::string report_path = !opts.report_path.empty()      ? opts.report_path
                                  : !cfg.output.report.empty() ? cfg.output.report
                                                               : stem_path(opts.config_path, "_report.json");
  const std::string mesh_path = !opts.mesh_path.empty() ? opts.mesh_path : cfg.output.mesh;
  if (!mesh_path.empty() && cfg.n != 2) {
    err << "error: mesh export needs n = 2\n";
    return kExitBadInput;
  }

  auto result = continuation_solve(prob, cfg.solver, cfg.schedule);
  const auto& grid = *prob.grid;
  if (result.converged()) result.report.verification = verify(result.support(prob.grid), prob);

  try {
    write_json(solution_path, solution_json(cfg, grid, result));
    write_json(report_path, result.report.to_json());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  out << "status " << to_string(result.report.status) << ", t = " << result.report.t_reached << ", "
      << result.report.steps.size() << " t-step(s)\n";
  out << format_line("final residual %.3e, robin residual %.3e\n", result.report.final_residual,
                     result.report.final_robin_residual);
  out << "solution written to " << solution_path << ", report to " << report_path << '\n';

  if (!result.converged()) {
    err << "error: continuation stalled at t = " << result.report.t_reached
        << " (last successful iterate written)\n";
    return kExitSolverStall;
  }
  if (!mesh_path.empty()) {
    try {
      const auto mesh = embed(result.support(prob.grid));
      std::ofstream mout(mesh_path);
      if (!mout) throw ConfigError("cannot write '" + mesh_path + "'");
      write_obj(mesh, mout);
      out << "mesh written to " << mesh_path << " (" << mesh.vertices.size() << " vertices)\n";
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitBadInput;
    }
  }
  return kExitOk;
}

int cmd_verify(const std::string& solution_path, std::ostream& out, std::ostream& err, const std::string& json_path) {
  std::optional<LoadedSolution> sol;
  try {
    sol.emplace(load_solution(solution_path));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  const auto rep = verify(sol->h, sol->problem);
  out << rep.table();

  double recomputed = 0.0;
  if (sol->log_h) {
    recomputed = residual(*sol->log_h, sol->problem).max_norm();
  } else {
    ScalarField v(sol->h.values().size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::log(sol->h.values()[k]);
    recomputed = residual(v, sol->problem).max_norm();
  }
  out << format_line("final residual: stored %.6e, recomputed %.6e\n", sol->stored_residual, recomputed);

  if (!json_path.empty()) {
    auto j = rep.to_json();
    j["stored_residual"] = sol->stored_residual;
    j["recomputed_residual"] = recomputed;
    try {
      write_json(json_path, j);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitBadInput;
    }
  }
  return rep.passed() ? kExitOk : kExitCheckFailed;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg, const std::vector<int>& grids) {
  const auto scale = cfg.f.manufactured_scale();
  if (!scale) {
    throw ConfigError("convergence needs a manufactured density (kind manufactured or homotopy_start); '" +
                      to_string(cfg.f.kind) + "' has no exact solution");
  }
  if (grids.empty()) throw ConfigError("convergence needs at least one grid size");
  std::vector<ConvergenceRow> rows;
  for (int n_grid : grids) {
    if (n_grid < 4 || (cfg.n == 2 && n_grid % 2 != 0)) {
      throw ConfigError("grid size " + std::to_string(n_grid) + " is not usable (need even N >= 4)");
    }
    const auto local = cfg.with_grid(n_grid, n_grid);
    const auto prob = local.problem();
    const auto res = continuation_solve(prob, local.solver, local.schedule);
    const auto l = l_field(*prob.grid);
    ConvergenceRow row;
    row.n_grid = n_grid;
    row.spacing = prob.grid->spacing();
    row.status = res.report.status;
    for (std::size_t k = 0; k < l.size(); ++k) {
      row.error = std::max(row.error, std::abs(std::exp(res.v[k]) - *scale * l[k]));
    }
    if (!rows.empty()) {
      const auto& prev = rows.back();
      row.order = std::log(prev.error / row.error) / std::log(prev.spacing / row.spacing);
    }
    rows.push_back(row);
  }
  return rows;
}

int cmd_convergence(const std::string& config_path, const std::vector<int>& grids, std::ostream& out,
                    std::ostream& err, const std::string& json_path) {
  std::vector<ConvergenceRow> rows;
  try {
    rows = convergence_study(RunConfig::load(config_path), grids);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  char line[160];
  const bool has_order = rows.size() > 1;
  if (has_order) {
    std::snprintf(line, sizeof line, "%6s %12s %14s %8s\n", "N", "spacing", "max error", "order");
  } else {
    std::snprintf(line, sizeof line, "%6s %12s %14s\n", "N", "spacing", "max error");
  }
  out << line;
  auto arr = ordered_json::array();
  bool stalled = false;
  for (const auto& r : rows) {
    if (has_order && r.order) {
      std::snprintf(line, sizeof line, "%6d %12.5e %14.6e %8.3f\n", r.n_grid, r.spacing, r.error, *r.order);
    } else if (has_order) {
      std::snprintf(line, sizeof line, "%6d %12.5e %14.6e %8s\n", r.n_grid, r.spacing, r.error, "-");
    } else {
      std::snprintf(line, sizeof line, "%6d %12.5e %14.6e\n", r.n_grid, r.spacing, r.error);
    }
    out << line;
    stalled = stalled || r.status != SolveStatus::Converged;
    ordered_json item;
    item["n"] = r.n_grid;
    item["spacing"] = r.spacing;
    item["error"] = r.error;
    item["order"] = r.order ? ordered_json(*r.order) : ordered_json(nullptr);
    item["status"] = to_string(r.status);
    arr.push_back(std::move(item));
  }
  if (!json_path.empty()) {
    try {
      write_json(json_path, ordered_json{{"rows", arr}});
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitBadInput;
    }
  }
  if (stalled) {
    err << "error: at least one solve did not converge\n";
    return kExitSolverStall;
  }
  if (has_order && *rows.back().order < 1.9) {
    err << "observed order " << *rows.back().order << " is below 1.9\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_oracle(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  ProblemSpec prob;
  std::optional<RadialProfile> profile;
  try {
    cfg = RunConfig::load(config_path);
    prob = cfg.problem();
    profile = cfg.f.radial_profile(cfg.cap(), cfg.pq);
    if (!profile) throw NotAxisymmetric("density '" + to_string(cfg.f.kind) + "' depends on phi; the oracle needs f = f(r)");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  const auto res = continuation_solve(prob, cfg.solver, cfg.schedule);
  if (!res.converged()) {
    err << "error: 2D solve stalled at t = " << res.report.t_reached << '\n';
    return kExitSolverStall;
  }
  OracleReport rep;
  try {
    rep = oracle_compare(prob, res.support(prob.grid), *profile);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  out << "radial grid: " << rep.fine_intervals << " intervals, status " << to_string(rep.radial_status) << '\n';
  out << format_line("max discrepancy %.6e (threshold %.6e)\n", rep.max_discrepancy, rep.threshold);
  out << format_line("L2 discrepancy %.6e, angular variation %.3e\n", rep.l2_discrepancy, rep.angular_variation);
  if (rep.radial_status != SolveStatus::Converged) return kExitSolverStall;
  const bool ok = rep.passed();
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace capdual
