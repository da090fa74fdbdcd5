#pragma once

// Damped Newton on the log-variable system, driven along the homotopy
// f_t = (1 - t) f_0 + t f from the exact start h = l.

#include <optional>
#include <string>
#include <vector>

#include "capdual/apriori.hpp"
#include "capdual/ma_system.hpp"

namespace capdual {

enum class SolveStatus { Converged, MaxIterations, LineSearchStall, SingularSystem, ContinuationStall };

std::string to_string(SolveStatus status);

struct SolverConfig {
  double tolerance = 1e-9;        // residual max-norm
  int max_iterations = 40;        // per t-step
  double backtrack = 0.5;         // line-search reduction factor, in (0, 1)
  double min_step = 1e-10;        // smallest accepted damping factor
  double convexity_floor = 1e-8;  // relative to the largest eigenvalue of B

  void validate() const;
};

struct HomotopySchedule {
  std::vector<double> t_values;  // used when !adaptive; must end at 1
  bool adaptive = true;
  double initial_step = 0.25;
  double min_step = 1.0 / 1024.0;
  double max_step = 1.0;
  int easy_iterations = 5;  // a t-step converging this fast counts as easy

  static HomotopySchedule fixed(std::vector<double> t_values);
  void validate() const;
};

struct NewtonTrace {
  std::vector<double> residuals;  // merit of each accepted iterate, starting with the initial guess
  std::vector<double> margins;    // convexity margin of h = e^v on interior nodes
  std::vector<double> step_lengths;
  int iterations = 0;
};

struct NewtonResult {
  ScalarField v;  // converged iterate, or the best one seen on failure
  RingSplitField state;  // the same iterate as held by the solver
  SolveStatus status = SolveStatus::Converged;
  NewtonTrace trace;
  double final_residual = 0.0;
};

struct TStepRecord {
  double t = 0.0;
  bool accepted = false;
  SolveStatus status = SolveStatus::Converged;
  int newton_iters = 0;
  std::vector<double> residuals;
  std::vector<double> margins;
  double seconds = 0.0;
};

struct SolveReport {
  std::vector<TStepRecord> steps;
  double homotopy_start_residual = 0.0;  // residual of log l against f_0
  double final_residual = 0.0;
  double final_robin_residual = 0.0;
  double min_margin = 0.0;
  double t_reached = 0.0;
  double wall_seconds = 0.0;
  SolveStatus status = SolveStatus::Converged;
  std::optional<VerificationReport> verification;

  std::vector<double> accepted_t() const;
  nlohmann::ordered_json to_json() const;
};

/// f_t at every node.
ScalarField homotopy_density(double t, const ProblemSpec& prob);

/// Throws NonConvex if B(v0) is not positive definite on the interior.
NewtonResult newton_solve(ScalarField v0, const ProblemSpec& prob, const SolverConfig& cfg);
NewtonResult newton_solve(RingSplitField v0, const ProblemSpec& prob, const SolverConfig& cfg);

struct ContinuationResult {
  ScalarField v;  // log h at t_reached
  RingSplitField state;  // log h as held by the solver; residual(state) is the reported one
  SolveReport report;

  bool converged() const { return report.status == SolveStatus::Converged; }
  SupportField support(const GridPtr& grid) const;
};

ContinuationResult continuation_solve(const ProblemSpec& prob, const SolverConfig& cfg = {},
                                      const HomotopySchedule& sched = {});

struct UniquenessReport {
  std::vector<SolveStatus> statuses;
  std::vector<int> iterations;
  std::vector<std::vector<double>> distances;  // pairwise max |h_a - h_b|
  double max_distance = 0.0;
  std::vector<ScalarField> solutions;  // h for each start
};

/// Newton at t = 1 from each start in the log variable.
UniquenessReport uniqueness_probe(const ProblemSpec& prob, const SolverConfig& cfg,
                                  const std::vector<ScalarField>& starts);

}  // namespace capdual
