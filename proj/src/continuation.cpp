#include "capdual/continuation.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "capdual/errors.hpp"

namespace capdual {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::LineSearchStall:
      return "line_search_stall";
    case SolveStatus::SingularSystem:
      return "singular_system";
    case SolveStatus::ContinuationStall:
      return "continuation_stall";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidArgument("backtracking factor must lie in (0, 1)");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!(min_step > 0.0 && min_step <= 1.0)) throw InvalidArgument("min_step must lie in (0, 1]");
  if (!(convexity_floor >= 0.0)) throw InvalidArgument("convexity floor must be non-negative");
}

HomotopySchedule HomotopySchedule::fixed(std::vector<double> t_values) {
  HomotopySchedule s;
  s.adaptive = false;
  s.t_values = std::move(t_values);
  return s;
}

void HomotopySchedule::validate() const {
  if (!(min_step > 0.0 && min_step <= initial_step && initial_step <= max_step && max_step <= 1.0)) {
    throw InvalidArgument("homotopy schedule needs 0 < min_step <= initial_step <= max_step <= 1");
  }
  if (adaptive) return;
  if (t_values.empty() || t_values.back() != 1.0) throw InvalidArgument("fixed homotopy schedule must end at t = 1");
  double prev = 0.0;
  for (double t : t_values) {
    if (!(t > prev)) throw InvalidArgument("fixed homotopy schedule must be strictly increasing in (0, 1]");
    prev = t;
  }
}

std::vector<double> SolveReport::accepted_t() const {
  std::vector<double> out;
  for (const auto& s : steps) {
    if (s.accepted) out.push_back(s.t);
  }
  return out;
}

nlohmann::ordered_json SolveReport::to_json() const {
  nlohmann::ordered_json j;
  auto t_steps = nlohmann::ordered_json::array();
  auto iters = nlohmann::ordered_json::array();
  auto residuals = nlohmann::ordered_json::array();
  auto margins = nlohmann::ordered_json::array();
  auto timings = nlohmann::ordered_json::array();
  auto accepted = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    t_steps.push_back(s.t);
    iters.push_back(s.newton_iters);
    residuals.push_back(s.residuals);
    margins.push_back(s.margins);
    timings.push_back(s.seconds);
    accepted.push_back(s.accepted);
  }
  j["t_steps"] = std::move(t_steps);
  j["newton_iters"] = std::move(iters);
  j["residuals"] = std::move(residuals);
  j["margins"] = std::move(margins);
  j["timings"] = std::move(timings);
  j["final_residual"] = final_residual;
  j["accepted"] = std::move(accepted);
  j["status"] = to_string(status);
  j["t_reached"] = t_reached;
  j["homotopy_start_residual"] = homotopy_start_residual;
  j["final_robin_residual"] = final_robin_residual;
  j["min_margin"] = min_margin;
  j["wall_seconds"] = wall_seconds;
  if (verification) j["verification"] = verification->to_json();
  return j;
}

ScalarField homotopy_density(double t, const ProblemSpec& prob) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("homotopy parameter must lie in [0, 1]");
  if (t == 1.0) return prob.f;
  ScalarField ft = homotopy_start_density(*prob.grid, prob.pq);
  if (t == 0.0) return ft;
  for (std::size_t k = 0; k < ft.size(); ++k) ft[k] = (1.0 - t) * ft[k] + t * prob.f[k];
  return ft;
}

namespace {

using Lu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool margin_ok(const LogMargin& m, const SolverConfig& cfg) {
  return m.min_eigenvalue > 0.0 && m.min_eigenvalue >= cfg.convexity_floor * m.max_eigenvalue;
}

}  // namespace

NewtonResult newton_solve(ScalarField v0, const ProblemSpec& prob, const SolverConfig& cfg) {
  if (v0.size() != prob.grid->size()) throw InvalidArgument("initial guess size does not match the grid");
  return newton_solve(RingSplitField(prob.grid->nphi(), v0), prob, cfg);
}

NewtonResult newton_solve(RingSplitField v0, const ProblemSpec& prob, const SolverConfig& cfg) {
  cfg.validate();
  const auto& grid = *prob.grid;
  if (v0.size() != grid.size()) throw InvalidArgument("initial guess size does not match the grid");

  LogMargin margin = log_variable_margin(v0, grid);
  if (!margin_ok(margin, cfg)) {
    throw NonConvex("newton_solve: initial guess is not convex (min eigenvalue of B = " +
                    std::to_string(margin.min_eigenvalue) + ")");
  }

  NewtonResult out;
  out.state = std::move(v0);
  auto res = residual(out.state, prob);
  double merit = res.max_norm();
  out.trace.residuals.push_back(merit);
  out.trace.margins.push_back(margin.min_a_eigenvalue);

  Lu lu;
  bool analysed = false;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(grid.size()));
  ScalarField step_dir(grid.size());

  for (int it = 0;; ++it) {
    if (merit <= cfg.tolerance) {
      out.status = SolveStatus::Converged;
      break;
    }
    if (it >= cfg.max_iterations) {
      out.status = SolveStatus::MaxIterations;
      break;
    }
    const auto jac = jacobian(out.state, prob);
    if (!analysed) {
      lu.analyzePattern(jac.matrix);
      analysed = true;
    }
    lu.factorize(jac.matrix);
    if (lu.info() != Eigen::Success) {
      out.status = SolveStatus::SingularSystem;
      break;
    }
    for (std::size_t k = 0; k < grid.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = -res.values[k];
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      out.status = SolveStatus::SingularSystem;
      break;
    }
    for (std::size_t k = 0; k < grid.size(); ++k) step_dir[k] = delta[static_cast<Eigen::Index>(k)];

    double alpha = 1.0;
    bool accepted = false;
    ResidualVector trial_res;
    LogMargin trial_margin;
    RingSplitField trial;
    while (alpha >= cfg.min_step) {
      trial = out.state;
      trial.axpy(alpha, step_dir);
      trial_res = residual(trial, prob);
      const double trial_merit = trial_res.max_norm();
      if (trial_merit < merit) {
        trial_margin = log_variable_margin(trial, grid);
        if (margin_ok(trial_margin, cfg)) {
          accepted = true;
          merit = trial_merit;
          break;
        }
      }
      alpha *= cfg.backtrack;
    }
    if (!accepted) {
      out.status = SolveStatus::LineSearchStall;
      break;
    }
    out.state = std::move(trial);
    res = std::move(trial_res);
    ++out.trace.iterations;
    out.trace.residuals.push_back(merit);
    out.trace.margins.push_back(trial_margin.min_a_eigenvalue);
    out.trace.step_lengths.push_back(alpha);
  }
  out.final_residual = merit;
  out.v = out.state.values();
  return out;
}

SupportField ContinuationResult::support(const GridPtr& grid) const {
  ScalarField h(v.size());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = std::exp(v[k]);
  return {grid, std::move(h)};
}

ContinuationResult continuation_solve(const ProblemSpec& prob, const SolverConfig& cfg,
                                      const HomotopySchedule& sched) {
  const auto wall_start = std::chrono::steady_clock::now();
  prob.validate();
  cfg.validate();
  sched.validate();
  const auto& grid = *prob.grid;

  ContinuationResult out;
  auto& report = out.report;
  const auto l = l_field(grid);
  ScalarField log_l(l.size());
  for (std::size_t k = 0; k < l.size(); ++k) log_l[k] = std::log(l[k]);
  out.state = RingSplitField(grid.nphi(), log_l);

  const auto f0 = homotopy_start_density(grid, prob.pq);
  report.homotopy_start_residual = residual(out.state, prob.with_density(f0)).max_norm();

  double f_scale = 0.0, f_diff = 0.0;
  for (std::size_t k = 0; k < f0.size(); ++k) {
    f_scale = std::max(f_scale, std::abs(f0[k]));
    f_diff = std::max(f_diff, std::abs(prob.f[k] - f0[k]));
  }
  const bool constant_path = f_diff <= 1e-14 * f_scale;

  double t = 0.0;
  double step = constant_path ? 1.0 : (sched.adaptive ? sched.initial_step : sched.t_values.front());
  std::size_t target_index = 0;
  int easy_streak = 0;
  report.status = SolveStatus::Converged;
  report.min_margin = log_variable_margin(out.state, grid).min_a_eigenvalue;

  while (t < 1.0) {
    double target = 1.0;
    if (!constant_path && !sched.adaptive) target = sched.t_values[target_index];
    const double t_try = std::min(target, t + step);

    const auto step_start = std::chrono::steady_clock::now();
    TStepRecord rec;
    rec.t = t_try;
    NewtonResult nr;
    try {
      nr = newton_solve(out.state, prob.with_density(homotopy_density(t_try, prob)), cfg);
      rec.status = nr.status;
    } catch (const NonConvex&) {
      rec.status = SolveStatus::LineSearchStall;
    }
    rec.newton_iters = nr.trace.iterations;
    rec.residuals = nr.trace.residuals;
    rec.margins = nr.trace.margins;
    rec.accepted = rec.status == SolveStatus::Converged;
    rec.seconds = seconds_since(step_start);
    report.steps.push_back(rec);

    if (rec.accepted) {
      out.state = std::move(nr.state);
      for (double m : rec.margins) report.min_margin = std::min(report.min_margin, m);
      const double advanced = t_try - t;
      t = t_try;
      if (!constant_path && !sched.adaptive) {
        if (t_try == target && target_index + 1 < sched.t_values.size()) {
          ++target_index;
          step = sched.t_values[target_index] - t;
        } else {
          step = advanced;
        }
      } else if (rec.newton_iters <= sched.easy_iterations) {
        if (++easy_streak >= 2) {
          step = std::min(2.0 * step, sched.max_step);
          easy_streak = 0;
        }
      } else {
        easy_streak = 0;
      }
      continue;
    }

    easy_streak = 0;
    step = 0.5 * (t_try - t);
    if (step < sched.min_step) {
      report.status = SolveStatus::ContinuationStall;
      break;
    }
  }

  report.t_reached = t;
  out.v = out.state.values();
  const auto final_res = residual(out.state, prob.with_density(homotopy_density(t, prob)));
  report.final_residual = final_res.max_norm();
  report.final_robin_residual = final_res.boundary_max_norm(grid);
  report.wall_seconds = seconds_since(wall_start);
  return out;
}

UniquenessReport uniqueness_probe(const ProblemSpec& prob, const SolverConfig& cfg,
                                  const std::vector<ScalarField>& starts) {
  prob.validate();
  UniquenessReport rep;
  for (const auto& s : starts) {
    auto nr = newton_solve(s, prob, cfg);
    rep.statuses.push_back(nr.status);
    rep.iterations.push_back(nr.trace.iterations);
    ScalarField h(nr.v.size());
    for (std::size_t k = 0; k < h.size(); ++k) h[k] = std::exp(nr.v[k]);
    rep.solutions.push_back(std::move(h));
  }
  const std::size_t m = rep.solutions.size();
  rep.distances.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      double d = 0.0;
      for (std::size_t k = 0; k < rep.solutions[a].size(); ++k) {
        d = std::max(d, std::abs(rep.solutions[a][k] - rep.solutions[b][k]));
      }
      rep.distances[a][b] = rep.distances[b][a] = d;
      rep.max_distance = std::max(rep.max_distance, d);
    }
  }
  return rep;
}

}  // namespace capdual
