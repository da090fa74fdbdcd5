#include <cmath>
#include <numbers>

#include "capdual/apriori.hpp"
#include "capdual/continuation.hpp"
#include "capdual/errors.hpp"
#include "doctest.h"

using namespace capdual;

namespace {

const double kPi = std::numbers::pi;

ScalarField log_of(ScalarField h, double c = 1.0) {
  for (double& x : h) x = std::log(c * x);
  return h;
}

ScalarField generic_f(const PolarGrid& g, double amp = 0.3) {
  ScalarField f(g.size());
  const double s = g.spec().sin_theta();
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double r = g.node_r(k), p = g.node_phi(k);
    f[k] = 1.0 + amp * std::cos(p + 0.5) * std::sin(r) / s + 0.1 * std::pow(std::sin(r) / s, 2) * std::sin(2 * p);
  }
  return f;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_SUITE("continuation") {
  TEST_CASE("homotopy density") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 12, 8);
    const ExponentPair pq{3.0, 1.0};
    const auto f0 = homotopy_start_density(*g, pq);
    const ProblemSpec prob{g, pq, generic_f(*g)};
    CHECK(homotopy_density(0.0, prob) == f0);
    CHECK(homotopy_density(1.0, prob) == prob.f);
    const auto half = homotopy_density(0.5, prob);
    for (std::size_t k = 0; k < f0.size(); ++k) CHECK(half[k] == doctest::Approx(0.5 * (f0[k] + prob.f[k])));
    const ProblemSpec same{g, pq, f0};
    const auto h2 = homotopy_density(0.5, same);
    for (std::size_t k = 0; k < f0.size(); ++k) CHECK(h2[k] == doctest::Approx(f0[k]).epsilon(1e-15));
    CHECK_THROWS_AS(homotopy_density(1.5, prob), InvalidArgument);
  }

  TEST_CASE("newton from log l with f0 converges in at most 3 iterations") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 32, 32);
    const ExponentPair pq{3.0, 1.0};
    const ProblemSpec prob{g, pq, homotopy_start_density(*g, pq)};
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    const auto nr = newton_solve(log_of(l_field(*g)), prob, cfg);
    CHECK(nr.status == SolveStatus::Converged);
    CHECK(nr.trace.iterations <= 3);
    CHECK(nr.final_residual <= 1e-10);
    for (std::size_t i = 1; i < nr.trace.residuals.size(); ++i) CHECK(nr.trace.residuals[i] < nr.trace.residuals[i - 1]);
  }

  TEST_CASE("newton pulls a scaled start back to the solution") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 32, 32);
    const ExponentPair pq{3.0, 1.0};
    const ProblemSpec prob{g, pq, homotopy_start_density(*g, pq)};
    const auto from_l = newton_solve(log_of(l_field(*g)), prob, {});
    const auto from_scaled = newton_solve(log_of(l_field(*g), 1.2), prob, {});
    REQUIRE(from_scaled.status == SolveStatus::Converged);
    CHECK(max_diff(from_l.v, from_scaled.v) < 1e-8);
    CHECK(max_diff(from_scaled.v, log_of(l_field(*g))) < 1e-3);
    for (double m : from_scaled.trace.margins) CHECK(m > 0.0);
  }

  TEST_CASE("newton rejects a non-convex start") {
    auto g = PolarGrid::make(CapSpec(1.0), 16, 16);
    const ExponentPair pq{3.0, 1.0};
    const ProblemSpec prob{g, pq, homotopy_start_density(*g, pq)};
    auto v = log_of(l_field(*g));
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= 3.0 * std::pow(std::sin(g->node_r(k)), 2);
    CHECK_THROWS_AS(newton_solve(v, prob, {}), NonConvex);
  }

  TEST_CASE("constant homotopy takes one step and returns l") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 32, 32);
    const ExponentPair pq{3.0, 1.0};
    const auto res = continuation_solve({g, pq, homotopy_start_density(*g, pq)});
    CHECK(res.converged());
    CHECK(res.report.steps.size() == 1);
    CHECK(res.report.homotopy_start_residual < 10.0 * g->spacing() * g->spacing());
    const auto h = res.support(g);
    CHECK(max_diff(h.values(), l_field(*g)) < 10.0 * g->spacing() * g->spacing());
  }

  TEST_CASE("generic density: convergence, monotone merit, verification") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 32, 32);
    const ExponentPair pq{3.0, 1.0};
    ScalarField f = homotopy_start_density(*g, pq);
    for (std::size_t k = 0; k < f.size(); ++k) {
      f[k] *= std::max(0.05, 1.0 + 0.3 * std::sin(g->node_phi(k)) * std::sin(g->node_r(k)) / g->spec().sin_theta());
    }
    const ProblemSpec prob{g, pq, f};
    const auto res = continuation_solve(prob);
    REQUIRE(res.converged());
    CHECK(res.report.final_residual <= 1e-9);
    CHECK(res.report.min_margin > 0.0);
    for (const auto& s : res.report.steps) {
      if (!s.accepted) continue;
      for (std::size_t i = 1; i < s.residuals.size(); ++i) CHECK(s.residuals[i] < s.residuals[i - 1]);
      for (double m : s.margins) CHECK(m > 0.0);
    }
    CHECK(res.report.accepted_t().back() == 1.0);
    const auto rep = verify(res.support(g), prob);
    CHECK(rep.passed());
  }

  TEST_CASE("scale equivariance") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 24, 24);
    const ExponentPair pq{3.0, 1.0};
    const auto f = generic_f(*g);
    ScalarField fc(f);
    const double c = 1.7;
    for (double& x : fc) x *= std::pow(c, pq.q - pq.p);
    const auto a = continuation_solve({g, pq, f});
    const auto b = continuation_solve({g, pq, fc});
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    ScalarField shifted(a.v);
    for (double& x : shifted) x += std::log(c);
    // residuals of both are below 1e-9 and the linearisation is O(1)
    CHECK(max_diff(shifted, b.v) < 1e-8);
  }

  TEST_CASE("determinism") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 24, 24);
    const ProblemSpec prob{g, {6.0, 4.0}, generic_f(*g)};
    const auto a = continuation_solve(prob);
    const auto b = continuation_solve(prob);
    CHECK(a.v == b.v);
    CHECK(a.report.steps.size() == b.report.steps.size());
    for (std::size_t i = 0; i < a.report.steps.size(); ++i) CHECK(a.report.steps[i].residuals == b.report.steps[i].residuals);
  }

  TEST_CASE("fixed schedule and report serialisation") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 16, 16);
    const ProblemSpec prob{g, {3.0, 1.0}, generic_f(*g)};
    const auto res = continuation_solve(prob, {}, HomotopySchedule::fixed({0.3, 0.6, 1.0}));
    REQUIRE(res.converged());
    CHECK(res.report.accepted_t() == std::vector<double>{0.3, 0.6, 1.0});
    const auto j = res.report.to_json();
    for (const char* key : {"t_steps", "newton_iters", "residuals", "margins", "timings", "final_residual"}) {
      CHECK(j.contains(key));
    }
    CHECK_THROWS_AS(HomotopySchedule::fixed({0.5, 0.4, 1.0}).validate(), InvalidArgument);
    CHECK_THROWS_AS(HomotopySchedule::fixed({0.5}).validate(), InvalidArgument);
    SolverConfig bad;
    bad.backtrack = 1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }

  TEST_CASE("uniqueness probe") {
    auto g = PolarGrid::make(CapSpec(kPi / 3), 24, 24);
    const ProblemSpec prob{g, {3.0, 1.0}, generic_f(*g)};
    const auto sol = continuation_solve(prob);
    REQUIRE(sol.converged());
    // Newton alone from log l or log 1.5 l (no continuation)
    const auto rep = uniqueness_probe(prob, {}, {log_of(l_field(*g)), log_of(l_field(*g), 1.5)});
    for (auto s : rep.statuses) CHECK(s == SolveStatus::Converged);
    CHECK(rep.max_distance < 1e-8);

    const auto same = uniqueness_probe(prob, {}, {sol.v, sol.v});
    CHECK(same.max_distance == 0.0);

    const ProblemSpec small{g, {1.5, 1.4}, generic_f(*g)};
    const auto rs = uniqueness_probe(small, {}, {log_of(l_field(*g)), log_of(l_field(*g), 1.5)});
    for (auto st : rs.statuses) CHECK(st == SolveStatus::Converged);
    CHECK(rs.max_distance < 1e-8);
  }
}
