#pragma once

// Subcommands behind the capdual executable.  Exit codes: 0 success,
// 1 a check failed, 2 bad input (config, file, non-axisymmetric data),
// 3 the solver did not converge.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capdual/run_config.hpp"

namespace capdual {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitBadInput = 2, kExitSolverStall = 3 };

/// Solution file: the run config, grid metadata, nodal h, log h as held by
/// the solver and the final residual.  No timings, so identical configs give
/// identical files.
nlohmann::ordered_json solution_json(const RunConfig& cfg, const PolarGrid& grid, const ContinuationResult& result);

struct LoadedSolution {
  RunConfig config;
  ProblemSpec problem;
  SupportField h;
  std::optional<RingSplitField> log_h;  // present when consistent with h
  double stored_residual = 0.0;
};

/// Throws ConfigError on a missing, truncated or inconsistent file.
LoadedSolution load_solution(const std::string& path);

struct SolveOptions {
  std::string config_path;
  std::string solution_path;  // empty: config output.solution, else <stem>_solution.json
  std::string report_path;    // empty: config output.report, else <stem>_report.json
  std::string mesh_path;      // empty: config output.mesh, else no mesh
};

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& solution_path, std::ostream& out, std::ostream& err,
               const std::string& json_path = "");
int cmd_convergence(const std::string& config_path, const std::vector<int>& grids, std::ostream& out,
                    std::ostream& err, const std::string& json_path = "");
int cmd_oracle(const std::string& config_path, std::ostream& out, std::ostream& err);

struct ConvergenceRow {
  int n_grid = 0;
  double spacing = 0.0;
  double error = 0.0;
  std::optional<double> order;
  SolveStatus status = SolveStatus::Converged;
};

/// max |h - c l| for the manufactured density on N x N grids (N x 1 for n = 1).
/// Throws ConfigError unless the density is manufactured or homotopy_start.
std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg, const std::vector<int>& grids);

}  // namespace capdual
