// End-to-end acceptance run.  Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "capdual/apriori.hpp"
#include "capdual/axisym_oracle.hpp"
#include "capdual/capillary_body.hpp"
#include "capdual/continuation.hpp"
#include "capdual/errors.hpp"
#include "capdual/run_config.hpp"

using namespace capdual;

namespace {

const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

// Every converged solve is kept for the cross-cutting criteria.
struct Solved {
  std::string label;
  ProblemSpec prob;
  ContinuationResult res;
  double tolerance = 1e-9;
};
std::vector<Solved> g_solved;

const Solved& solve(const std::string& label, const ProblemSpec& prob, const SolverConfig& cfg = {}) {
  g_solved.push_back({label, prob, continuation_solve(prob, cfg), cfg.tolerance});
  return g_solved.back();
}

ScalarField log_of(ScalarField h, double c = 1.0) {
  for (double& x : h) x = std::log(c * x);
  return h;
}

double exp_max_diff(const ScalarField& v, const ScalarField& h, double scale = 1.0) {
  double m = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) m = std::max(m, std::abs(std::exp(v[k]) - scale * h[k]));
  return m;
}

// Harmonic density with values in [0.5, 2].
DensitySpec random_harmonic(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> mi(0, 4), ki(1, 3);
  DensitySpec d;
  d.kind = DensitySpec::Kind::Harmonic;
  d.c0 = 0.75 + 0.5 * u(rng);
  const double room = std::min(1.0 - 0.5 / d.c0, 2.0 / d.c0 - 1.0);
  d.epsilon = room * (0.3 + 0.7 * u(rng));
  d.m = mi(rng);
  d.radial_mode = d.m == 0 ? ki(rng) : d.m;
  d.phase = 2 * kPi * u(rng);
  return d;
}

ProblemSpec harmonic_problem(const GridPtr& g, ExponentPair pq, const DensitySpec& d) {
  return {g, pq, d.evaluate(*g, pq)};
}

Outcome criterion1() {
  Outcome o;
  const ExponentPair pq{3.0, 1.0};
  const std::pair<int, double> cases[] = {{64, 5e-4}, {128, 1.3e-4}};
  double prev = 0.0;
  for (const auto& [n, bound] : cases) {
    auto g = PolarGrid::make(CapSpec(kPi / 3), n, n);
    const auto t0 = std::chrono::steady_clock::now();
    const auto& s = solve("f0 " + std::to_string(n), {g, pq, homotopy_start_density(*g, pq)});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double e = exp_max_diff(s.res.v, l_field(*g));
    o.detail << " N=" << n << ": max|h-l| = " << e << " (" << secs << " s);";
    o.require(s.res.converged(), "converged at N=" + std::to_string(n));
    o.require(e <= bound, "error bound at N=" + std::to_string(n));
    o.require(secs < 60.0, "runtime at N=" + std::to_string(n));
    if (prev > 0.0) o.detail << " order " << std::log2(prev / e) << ";";
    prev = e;
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  for (double gap : {1.0, 2.0}) {
    const ExponentPair pq{1.0 + gap, 1.0};
    for (double c : {0.5, 2.0}) {
      double prev = 0.0, prev_h = 0.0, order = 0.0;
      bool within = true, converged = true;
      for (int n : {16, 32, 64}) {
        auto g = PolarGrid::make(CapSpec(kPi / 3), n, n);
        ScalarField f = homotopy_start_density(*g, pq);
        for (double& x : f) x *= std::pow(c, pq.q - pq.p);
        const auto& s = solve("manufactured", {g, pq, f});
        converged = converged && s.res.converged();
        const double e = exp_max_diff(s.res.v, l_field(*g), c);
        within = within && e <= 10.0 * g->spacing() * g->spacing();
        if (prev > 0.0) order = std::log(prev / e) / std::log(prev_h / g->spacing());
        prev = e;
        prev_h = g->spacing();
      }
      o.detail << " p-q=" << gap << ", c=" << c << ": order " << order << ";";
      o.require(converged && within && order >= 1.9, "p-q=" + std::to_string(gap) + " c=" + std::to_string(c));
    }
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937 rng(31);
  auto g = PolarGrid::make(CapSpec(kPi / 3), 64, 64);
  int solved = 0, failures = 0, stalls = 0;
  double worst_slack = 1e300;
  for (const ExponentPair pq : {ExponentPair{3.0, 1.0}, ExponentPair{6.0, 4.0}}) {
    for (int i = 0; i < 10; ++i) {
      const auto d = random_harmonic(rng);
      const auto prob = harmonic_problem(g, pq, d);
      const auto& s = solve("harmonic", prob);
      if (!s.res.converged()) {
        ++stalls;
        continue;
      }
      ++solved;
      const auto rep = verify(s.res.support(g), prob);
      failures += rep.failures();
      for (const char* name : {"c0_lower", "c0_upper", "gradient_bound"}) {
        worst_slack = std::min(worst_slack, rep.find(name)->slack);
      }
    }
  }
  o.detail << " " << solved << " solved, " << stalls << " stalled, " << failures
           << " verify failures, smallest bound slack " << worst_slack << ";";
  o.require(stalls == 0, "all specs converge");
  o.require(failures == 0, "zero verify failures");
  return o;
}

Outcome criterion4() {
  Outcome o;
  // Refinement of h_kn on three data sets; the rate is read off the finest pair.
  std::mt19937 rng(44);
  struct Series {
    ExponentPair pq;
    DensitySpec d;
  };
  const Series series[] = {{{3.0, 1.0}, random_harmonic(rng)}, {{6.0, 4.0}, random_harmonic(rng)},
                           {{3.0, 1.0}, random_harmonic(rng)}};
  for (const auto& sr : series) {
    std::vector<double> hkn;
    for (int n : {32, 64, 128}) {
      auto g = PolarGrid::make(CapSpec(kPi / 3), n, n);
      const auto& s = solve("refinement", harmonic_problem(g, sr.pq, sr.d));
      o.require(s.res.converged(), "refinement solve converged");
      hkn.push_back(boundary_identity_check(s.res.support(g)).max_h_kn);
    }
    const double r1 = std::log2(hkn[0] / hkn[1]), r2 = std::log2(hkn[1] / hkn[2]);
    o.detail << " (p,q)=(" << sr.pq.p << "," << sr.pq.q << ") m=" << sr.d.m << ": |h_kn| " << hkn[0] << " -> "
             << hkn[1] << " -> " << hkn[2] << ", rates " << r1 << ", " << r2 << ";";
    o.require(r2 >= 1.8, "h_kn rate on the finest pair");
  }
  double worst_robin = 0.0;
  bool robin_ok = true;
  for (const auto& s : g_solved) {
    if (!s.res.converged()) continue;
    worst_robin = std::max(worst_robin, s.res.report.final_robin_residual);
    robin_ok = robin_ok && s.res.report.final_robin_residual <= s.tolerance;
  }
  o.detail << " max Robin residual " << worst_robin << " over " << g_solved.size() << " solves;";
  o.require(robin_ok, "Robin residual below the Newton tolerance");
  return o;
}

Outcome criterion5() {
  Outcome o;
  double worst = 0.0;
  int count = 0;
  for (const auto& s : g_solved) {
    if (!s.res.converged()) continue;
    const auto& g = s.prob.grid;
    const auto d = measure_density(s.res.support(g), s.prob.pq);
    const auto l = l_field(*g);
    double e = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) e = std::max(e, std::abs(d[k] / l[k] - s.prob.f[k]) / s.prob.f[k]);
    const double bound = 10.0 * g->spacing() * g->spacing();
    worst = std::max(worst, e / bound);
    o.require(e <= bound, "measure consistency on " + s.label + " N=" + std::to_string(g->nr()));
    ++count;
  }
  o.detail << " " << count << " solutions, worst error / (10 spacing^2) = " << worst << ";";
  return o;
}

Outcome criterion6() {
  Outcome o;
  auto g = PolarGrid::make(CapSpec(kPi / 3), 64, 64);
  const ExponentPair pq{3.0, 1.0};
  ScalarField f(g->size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double s = std::sin(g->node_r(k)) / g->spec().sin_theta(), p = g->node_phi(k);
    f[k] = 1.0 + 0.25 * s * std::cos(p + 0.3) + 0.15 * s * s * std::sin(2 * p) + 0.1 * std::cos(g->node_r(k));
  }
  const ProblemSpec prob{g, pq, f};
  const auto& sol = solve("generic", prob);
  o.require(sol.res.converged(), "continuation converged");
  const auto rep = uniqueness_probe(prob, {}, {log_of(l_field(*g)), log_of(l_field(*g), 1.5)});
  bool all = true;
  for (auto st : rep.statuses) all = all && st == SolveStatus::Converged;
  double to_continuation = 0.0;
  for (const auto& h : rep.solutions) {
    for (std::size_t k = 0; k < h.size(); ++k) {
      to_continuation = std::max(to_continuation, std::abs(h[k] - std::exp(sol.res.v[k])));
    }
  }
  o.detail << " Newton iterations " << rep.iterations[0] << ", " << rep.iterations[1] << "; max distance "
           << rep.max_distance << "; distance to the continuation solution " << to_continuation << ";";
  o.require(all, "both starts converge");
  o.require(rep.max_distance <= 1e-8, "starts agree within 1e-8");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const ExponentPair pq{3.0, 1.0};
  for (int n : {32, 64}) {
    auto g = PolarGrid::make(CapSpec(kPi / 3), n, n);
    const auto f0 = radial_start_profile(g->spec(), pq);
    const RadialProfile prof = [f0](double r) { return f0(r) * (1.0 + 0.2 * std::cos(r)); };
    ScalarField f(g->size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = prof(g->node_r(k));
    const auto& s = solve("radial", {g, pq, f});
    o.require(s.res.converged(), "2D solve converged");
    const auto rep = oracle_compare(s.prob, s.res.support(g), prof);
    o.detail << " N=" << n << ": max discrepancy " << rep.max_discrepancy << " (threshold " << rep.threshold
             << "), angular variation " << rep.angular_variation << ";";
    o.require(rep.passed(), "oracle at N=" + std::to_string(n));
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::mt19937 rng(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto g = PolarGrid::make(CapSpec(kPi / 3), 32, 32);
  double worst = 0.0;
  int directions = 0;
  for (const ExponentPair pq : {ExponentPair{3.0, 1.0}, ExponentPair{6.0, 4.0}}) {
    ScalarField f = homotopy_start_density(*g, pq);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] *= 1.0 + 0.3 * std::sin(g->node_r(k)) * std::cos(g->node_phi(k));
    const ProblemSpec prob{g, pq, f};
    for (int trial = 0; trial < 12; ++trial) {
      auto v = log_of(l_field(*g));
      const double a = 0.05 * u(rng), b = 0.05 * u(rng);
      for (std::size_t k = 0; k < v.size(); ++k) {
        const double s = std::sin(g->node_r(k));
        v[k] += a * s * std::cos(g->node_phi(k)) + b * s * s * std::sin(2 * g->node_phi(k));
      }
      const auto J = jacobian(v, prob).matrix;
      Eigen::VectorXd dv(static_cast<Eigen::Index>(v.size()));
      for (auto& x : dv) x = nd(rng);
      dv /= dv.cwiseAbs().maxCoeff();
      const Eigen::VectorXd an = J * dv;
      // step chosen so the residual moves by about 1e-4
      const double eps = 1e-4 / an.cwiseAbs().maxCoeff();
      ScalarField vp(v), vm(v);
      for (std::size_t k = 0; k < v.size(); ++k) {
        vp[k] += eps * dv[static_cast<Eigen::Index>(k)];
        vm[k] -= eps * dv[static_cast<Eigen::Index>(k)];
      }
      const auto rp = residual(vp, prob), rm = residual(vm, prob);
      Eigen::VectorXd fd(dv.size());
      for (std::size_t k = 0; k < v.size(); ++k) fd[static_cast<Eigen::Index>(k)] = (rp.values[k] - rm.values[k]) / (2 * eps);
      worst = std::max(worst, (fd - an).cwiseAbs().maxCoeff() / an.cwiseAbs().maxCoeff());
      ++directions;
    }
  }
  o.detail << " " << directions << " directions, worst relative error " << worst << ";";
  o.require(directions >= 20 && worst <= 1e-6, "jacobian agreement");
  return o;
}

Outcome criterion9() {
  Outcome o;
  for (int n : {32, 128}) {
    auto g = PolarGrid::make(CapSpec(kPi / 3), n, n);
    const auto mesh = embed(SupportField(g, l_field(*g)));
    const double c = g->spec().cos_theta();
    double e = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
      const double r = g->node_r(k), p = g->node_phi(k);
      const Point3 xi{std::sin(r) * std::cos(p), std::sin(r) * std::sin(p), std::cos(r) - c};
      for (int d = 0; d < 3; ++d) e = std::max(e, std::abs(mesh.vertices[k][d] - xi[d]));
    }
    o.detail << " embed(l) N=" << n << ": " << e << ";";
    o.require(e <= mesh_tolerance(*g), "embed(l) at N=" + std::to_string(n));
  }
  int meshes = 0;
  double worst = 0.0;
  for (const auto& s : g_solved) {
    const auto& g = s.prob.grid;
    if (!s.res.converged() || g->nr() != 128) continue;
    const double theta = g->spec().theta();
    for (double a : contact_angle(embed(s.res.support(g)))) worst = std::max(worst, std::abs(a - theta) / theta);
    ++meshes;
  }
  o.detail << " contact angle on " << meshes << " solutions at 128x128: worst relative error " << worst << ";";
  o.require(meshes > 0 && worst <= 0.02, "contact angle within 2%");
  return o;
}

Outcome criterion10() {
  Outcome o;
  const auto base = nlohmann::json::parse(R"({"theta": 60, "angle_unit": "deg", "p": 3, "q": 1,
      "grid": {"nr": 16, "nphi": 16}, "f": {"kind": "constant", "c": 1}})");
  auto rejects = [](const nlohmann::json& j) {
    try {
      RunConfig::from_json(j);
    } catch (const ConfigError&) {
      return true;
    }
    return false;
  };
  auto pq_equal = base, pq_less = base, f_zero = base, f_neg = base;
  pq_equal["p"] = 1;
  pq_less["p"] = 0.5;
  f_zero["f"]["c"] = 0.0;
  f_neg["f"] = {{"kind", "radial"}, {"coefficients", {0.5, -1.0}}};
  o.require(!rejects(base), "valid config accepted");
  o.require(rejects(pq_equal) && rejects(pq_less), "p <= q rejected");
  o.require(rejects(f_zero) && rejects(f_neg), "non-positive f rejected");

  auto g = PolarGrid::make(CapSpec(1.0), 16, 16);
  const ExponentPair pq{3.0, 1.0};
  auto v = log_of(l_field(*g));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= 3.0 * std::pow(std::sin(g->node_r(k)), 2);
  bool threw = false;
  try {
    newton_solve(v, {g, pq, homotopy_start_density(*g, pq)}, {});
  } catch (const NonConvex&) {
    threw = true;
  }
  o.require(threw, "indefinite start rejected");
  o.detail << " p <= q, f = 0, f < 0 and an indefinite start are all rejected;";
  return o;
}

}  // namespace

int main() {
  const std::pair<int, std::function<Outcome()>> criteria[] = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {5, criterion5}, {10, criterion10}};
  std::vector<std::string> lines(11);
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    failed += o.pass ? 0 : 1;
    lines[static_cast<std::size_t>(id)] = (o.pass ? "PASS" : "FAIL") + std::string(" criterion ") +
                                           std::to_string(id) + ":" + o.detail.str();
    std::fprintf(stderr, "criterion %d done\n", id);
  }
  for (int id = 1; id <= 10; ++id) std::printf("%s\n", lines[static_cast<std::size_t>(id)].c_str());
  return failed == 0 ? 0 : 1;
}
