#pragma once

// Rotationally symmetric problems solved on a 1D grid, used to cross-check the
// 2D solver.  For h = h(r) the frame matrix of A = Hess h + h sigma is
// diagonal with entries h'' + h and cot r h' + h, so
//
//   (h'' + h) (cot r h' + h)^{n-1} = f h^{p-1} (h^2 + h'^2)^{(n+1-q)/2}.
//
// Nodes r_i = i * theta / N, i = 0..N.  The pole row uses the ghost
// h_{-1} = h_1 (h'(0) = 0) and the limit cot r h' -> h''(0); the last row is
// the Robin condition with a one-sided second order difference.

#include <functional>
#include <vector>

#include "capdual/capillary_body.hpp"
#include "capdual/continuation.hpp"
#include "capdual/ma_system.hpp"

namespace capdual {

using RadialProfile = std::function<double(double r)>;

struct RadialProblem {
  CapSpec cap;
  ExponentPair pq;
  std::vector<double> r;  // uniform, r.front() = 0, r.back() = theta
  std::vector<double> f;

  /// Samples `profile` on N + 1 uniform nodes.  Throws InvalidArgument if N < 4
  /// or f is not positive.
  static RadialProblem make(const CapSpec& cap, const ExponentPair& pq, const RadialProfile& profile, int intervals);

  double step() const { return r[1] - r[0]; }
  void validate() const;
};

/// f_0 = l^{1-p} (l^2 + l'^2)^{(q-n-1)/2} as a radial profile.
RadialProfile radial_start_profile(const CapSpec& cap, const ExponentPair& pq);

/// Product-form residual; row 0 is the pole equation, row N the Robin condition.
std::vector<double> radial_residual(const std::vector<double>& h, const RadialProblem& prob);

struct RadialSolution {
  std::vector<double> r;
  std::vector<double> h;
  SolveStatus status = SolveStatus::Converged;
  double final_residual = 0.0;
  int t_steps = 0;
  int newton_iters = 0;

  bool converged() const { return status == SolveStatus::Converged; }
  /// Four-point Lagrange interpolation, using the even extension across r = 0.
  double interpolate(double r) const;
};

struct RadialSolverConfig {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double min_t_step = 1.0 / 1024.0;
};

/// Newton on the product form along f_t = (1-t) f_0 + t f, starting from h = l.
RadialSolution radial_solve(const RadialProblem& prob, const RadialSolverConfig& cfg = {});

struct OracleReport {
  double max_discrepancy = 0.0;
  double l2_discrepancy = 0.0;      // sqrt(integral (h2d - h1d)^2 dsigma)
  double angular_variation = 0.0;   // max over rings of max h - min h
  double threshold = 0.0;           // 10 * spacing^2 of the 2D grid
  int fine_intervals = 0;
  SolveStatus radial_status = SolveStatus::Converged;
  double radial_residual = 0.0;

  bool passed(double angular_tolerance = 1e-7) const;
};

/// Compares a 2D solution with the radial solution for the same data.
/// `profile` must reproduce prob.f on the 2D nodes; throws NotAxisymmetric if
/// prob.f varies along a ring by more than 1e-12 relative, or disagrees
/// with the profile.  The 1D grid uses fine_factor * nr intervals.
OracleReport oracle_compare(const ProblemSpec& prob, const SupportField& h2d, const RadialProfile& profile,
                            int fine_factor = 4);

}  // namespace capdual
