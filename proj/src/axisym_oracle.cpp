#include "capdual/axisym_oracle.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "capdual/errors.hpp"

namespace capdual {

RadialProblem RadialProblem::make(const CapSpec& cap, const ExponentPair& pq, const RadialProfile& profile,
                                  int intervals) {
  if (intervals < 4) throw InvalidArgument("radial grid needs at least 4 intervals");
  RadialProblem prob{cap, pq, {}, {}};
  const double dr = cap.theta() / intervals;
  prob.r.resize(static_cast<std::size_t>(intervals) + 1);
  prob.f.resize(prob.r.size());
  for (int i = 0; i <= intervals; ++i) {
    const double r = i == intervals ? cap.theta() : i * dr;
    prob.r[static_cast<std::size_t>(i)] = r;
    prob.f[static_cast<std::size_t>(i)] = profile(r);
  }
  prob.validate();
  return prob;
}

void RadialProblem::validate() const {
  pq.validate();
  if (r.size() < 5 || f.size() != r.size()) throw InvalidArgument("radial problem needs matching r and f samples");
  for (double v : f) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("radial density must be positive and finite");
  }
}

RadialProfile radial_start_profile(const CapSpec& cap, const ExponentPair& pq) {
  const double c = cap.cos_theta();
  const double e = 0.5 * (pq.q - cap.n() - 1.0);
  const double p = pq.p;
  return [c, e, p](double r) {
    const double l = 1.0 - c * std::cos(r);
    const double dl = c * std::sin(r);
    return std::pow(l, 1.0 - p) * std::pow(l * l + dl * dl, e);
  };
}

namespace {

struct Row {
  double value = 0.0;
  double d_minus = 0.0;
  double d_centre = 0.0;
  double d_plus = 0.0;
  bool convex = true;
};

// Interior row i with neighbours hm, h, hp.
Row interior_row(double hm, double h, double hp, double r, double f, double dr, int n, const ExponentPair& pq) {
  const double e = 0.5 * (n + 1.0 - pq.q);
  const double d1 = (hp - hm) / (2.0 * dr);
  const double d2 = (hp - 2.0 * h + hm) / (dr * dr);
  const double cot = std::cos(r) / std::sin(r);
  const double a = d2 + h;
  const double b = cot * d1 + h;
  const double g = h * h + d1 * d1;

  const double bn1 = n == 1 ? 1.0 : std::pow(b, n - 1);
  const double bn2 = n == 1 ? 0.0 : (n - 1) * std::pow(b, n - 2);
  const double rhs = f * std::pow(h, pq.p - 1.0) * std::pow(g, e);
  const double rhs_h = f * (pq.p - 1.0) * std::pow(h, pq.p - 2.0) * std::pow(g, e);
  const double rhs_g = f * std::pow(h, pq.p - 1.0) * e * std::pow(g, e - 1.0);

  // partials of a, b, g with respect to (h_{i-1}, h_i, h_{i+1})
  const double da[3] = {1.0 / (dr * dr), -2.0 / (dr * dr) + 1.0, 1.0 / (dr * dr)};
  const double dd1[3] = {-0.5 / dr, 0.0, 0.5 / dr};
  const double db[3] = {cot * dd1[0], 1.0, cot * dd1[2]};
  const double dg[3] = {2.0 * d1 * dd1[0], 2.0 * h, 2.0 * d1 * dd1[2]};

  double d[3];
  for (int k = 0; k < 3; ++k) {
    d[k] = da[k] * bn1 + a * bn2 * db[k] - rhs_g * dg[k];
  }
  d[1] -= rhs_h;
  return {a * bn1 - rhs, d[0], d[1], d[2], a > 0.0 && b > 0.0};
}

// Pole row: h'(0) = 0 through the ghost h_{-1} = h_1, and cot r h' -> h''.
Row pole_row(double h0, double h1, double f, double dr, int n, const ExponentPair& pq) {
  const double a = 2.0 * (h1 - h0) / (dr * dr) + h0;
  const double power = pq.p - 1.0 + (n + 1.0 - pq.q);
  const double lhs = std::pow(a, n);
  const double dlhs = n * std::pow(a, n - 1);
  const double rhs = f * std::pow(h0, power);
  const double drhs = f * power * std::pow(h0, power - 1.0);
  Row row;
  row.value = lhs - rhs;
  row.d_centre = dlhs * (-2.0 / (dr * dr) + 1.0) - drhs;
  row.d_plus = dlhs * 2.0 / (dr * dr);
  row.convex = a > 0.0;
  return row;
}

struct Assembled {
  std::vector<double> values;
  Eigen::SparseMatrix<double> jac;
  bool convex = true;
};

Assembled assemble(const std::vector<double>& h, const RadialProblem& prob, const std::vector<double>& f,
                   bool with_jacobian) {
  const std::size_t m = h.size();
  const int n = prob.cap.n();
  const double dr = prob.step();
  Assembled out;
  out.values.resize(m);
  std::vector<Eigen::Triplet<double>> trip;

  const Row p0 = pole_row(h[0], h[1], f[0], dr, n, prob.pq);
  out.values[0] = p0.value;
  out.convex = out.convex && p0.convex;
  if (with_jacobian) {
    trip.emplace_back(0, 0, p0.d_centre);
    trip.emplace_back(0, 1, p0.d_plus);
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const Row row = interior_row(h[i - 1], h[i], h[i + 1], prob.r[i], f[i], dr, n, prob.pq);
    out.values[i] = row.value;
    out.convex = out.convex && row.convex;
    if (with_jacobian) {
      const auto ii = static_cast<Eigen::Index>(i);
      trip.emplace_back(ii, ii - 1, row.d_minus);
      trip.emplace_back(ii, ii, row.d_centre);
      trip.emplace_back(ii, ii + 1, row.d_plus);
    }
  }
  const std::size_t last = m - 1;
  const double cot_theta = prob.cap.cot_theta();
  out.values[last] = (3.0 * h[last] - 4.0 * h[last - 1] + h[last - 2]) / (2.0 * dr) - cot_theta * h[last];
  if (with_jacobian) {
    const auto ll = static_cast<Eigen::Index>(last);
    trip.emplace_back(ll, ll, 1.5 / dr - cot_theta);
    trip.emplace_back(ll, ll - 1, -2.0 / dr);
    trip.emplace_back(ll, ll - 2, 0.5 / dr);
    out.jac.resize(ll + 1, ll + 1);
    out.jac.setFromTriplets(trip.begin(), trip.end());
    out.jac.makeCompressed();
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::isfinite(x) ? std::max(m, std::abs(x)) : std::numeric_limits<double>::infinity();
  return m;
}

struct NewtonOutcome {
  SolveStatus status = SolveStatus::Converged;
  double merit = 0.0;
  int iterations = 0;
};

NewtonOutcome radial_newton(std::vector<double>& h, const RadialProblem& prob, const std::vector<double>& f,
                            const RadialSolverConfig& cfg) {
  NewtonOutcome out;
  auto sys = assemble(h, prob, f, true);
  out.merit = sys.convex ? max_abs(sys.values) : std::numeric_limits<double>::infinity();
  std::vector<double> trial(h.size());
  for (;;) {
    if (out.merit <= cfg.tolerance) return out;
    if (out.iterations >= cfg.max_iterations) {
      out.status = SolveStatus::MaxIterations;
      return out;
    }
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(h.size()));
    for (std::size_t i = 0; i < h.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = -sys.values[i];
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(sys.jac);
    if (lu.info() != Eigen::Success) {
      out.status = SolveStatus::SingularSystem;
      return out;
    }
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (!delta.allFinite()) {
      out.status = SolveStatus::SingularSystem;
      return out;
    }
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-10) {
      bool positive = true;
      for (std::size_t i = 0; i < h.size(); ++i) {
        trial[i] = h[i] + alpha * delta[static_cast<Eigen::Index>(i)];
        positive = positive && trial[i] > 0.0;
      }
      if (positive) {
        const auto trial_sys = assemble(trial, prob, f, false);
        const double merit = max_abs(trial_sys.values);
        if (trial_sys.convex && merit < out.merit) {
          out.merit = merit;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.status = SolveStatus::LineSearchStall;
      return out;
    }
    h.swap(trial);
    ++out.iterations;
    sys = assemble(h, prob, f, true);
  }
}

}  // namespace

std::vector<double> radial_residual(const std::vector<double>& h, const RadialProblem& prob) {
  if (h.size() != prob.r.size()) throw InvalidArgument("radial field size does not match the radial grid");
  return assemble(h, prob, prob.f, false).values;
}

RadialSolution radial_solve(const RadialProblem& prob, const RadialSolverConfig& cfg) {
  prob.validate();
  const auto start = radial_start_profile(prob.cap, prob.pq);
  std::vector<double> f0(prob.r.size());
  for (std::size_t i = 0; i < f0.size(); ++i) f0[i] = start(prob.r[i]);

  RadialSolution out;
  out.r = prob.r;
  out.h.resize(prob.r.size());
  for (std::size_t i = 0; i < out.h.size(); ++i) out.h[i] = 1.0 - prob.cap.cos_theta() * std::cos(prob.r[i]);

  double t = 0.0;
  double step = 0.25;
  int easy = 0;
  std::vector<double> ft(f0.size());
  std::vector<double> h_try;
  double merit = 0.0;
  while (t < 1.0) {
    const double t_try = std::min(1.0, t + step);
    for (std::size_t i = 0; i < ft.size(); ++i) ft[i] = t_try == 1.0 ? prob.f[i] : (1.0 - t_try) * f0[i] + t_try * prob.f[i];
    h_try = out.h;
    const auto nr = radial_newton(h_try, prob, ft, cfg);
    ++out.t_steps;
    out.newton_iters += nr.iterations;
    if (nr.status == SolveStatus::Converged) {
      out.h.swap(h_try);
      merit = nr.merit;
      t = t_try;
      if (nr.iterations <= 5 && ++easy >= 2) {
        step = std::min(1.0, 2.0 * step);
        easy = 0;
      }
      continue;
    }
    easy = 0;
    step *= 0.5;
    if (step < cfg.min_t_step) {
      out.status = SolveStatus::ContinuationStall;
      break;
    }
  }
  out.final_residual = t == 1.0 ? merit : max_abs(radial_residual(out.h, prob));
  return out;
}

double RadialSolution::interpolate(double x) const {
  const double dr = r[1] - r[0];
  const auto m = static_cast<long>(r.size());
  const double ax = std::abs(x);
  long i0 = static_cast<long>(std::floor(ax / dr)) - 1;
  i0 = std::min(i0, m - 4);
  double acc = 0.0;
  for (long a = 0; a < 4; ++a) {
    const long ia = i0 + a;
    const double ra = ia * dr;
    double w = 1.0;
    for (long b = 0; b < 4; ++b) {
      if (b == a) continue;
      w *= (ax - (i0 + b) * dr) / (ra - (i0 + b) * dr);
    }
    acc += w * h[static_cast<std::size_t>(std::abs(ia))];
  }
  return acc;
}

bool OracleReport::passed(double angular_tolerance) const {
  return radial_status == SolveStatus::Converged && max_discrepancy <= threshold &&
         angular_variation <= angular_tolerance;
}

OracleReport oracle_compare(const ProblemSpec& prob, const SupportField& h2d, const RadialProfile& profile,
                            int fine_factor) {
  prob.validate();
  const auto& grid = *prob.grid;
  if (fine_factor < 4) throw InvalidArgument("oracle grid must be at least 4x finer than the 2D grid");
  if (h2d.values().size() != grid.size()) throw InvalidArgument("2D solution does not match the problem grid");

  for (int i = 0; i < grid.nr(); ++i) {
    const double ref = profile(grid.r(i));
    for (int j = 0; j < grid.nphi(); ++j) {
      const double fv = prob.f[grid.index(i, j)];
      if (std::abs(fv - ref) > 1e-12 * std::max(std::abs(ref), 1.0)) {
        throw NotAxisymmetric("density varies along the ring r = " + std::to_string(grid.r(i)) +
                              " or disagrees with the radial profile");
      }
    }
  }

  OracleReport rep;
  rep.fine_intervals = fine_factor * grid.nr();
  const auto radial = RadialProblem::make(grid.spec(), prob.pq, profile, rep.fine_intervals);
  const auto sol = radial_solve(radial);
  rep.radial_status = sol.status;
  rep.radial_residual = sol.final_residual;
  rep.threshold = 10.0 * grid.spacing() * grid.spacing();

  const auto& hv = h2d.values();
  double l2 = 0.0;
  for (int i = 0; i < grid.nr(); ++i) {
    const double ref = sol.interpolate(grid.r(i));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = 0; j < grid.nphi(); ++j) {
      const auto k = grid.index(i, j);
      const double d = hv[k] - ref;
      rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(d));
      l2 += grid.weights()[k] * d * d;
      lo = std::min(lo, hv[k]);
      hi = std::max(hi, hv[k]);
    }
    rep.angular_variation = std::max(rep.angular_variation, hi - lo);
  }
  rep.l2_discrepancy = std::sqrt(l2);
  return rep;
}

}  // namespace capdual
