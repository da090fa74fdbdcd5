#include "capdual/apriori.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "capdual/errors.hpp"

namespace capdual {

BoundSet c0_bounds(double theta, int n, const ExponentPair& pq, double f_min, double f_max) {
  pq.validate();
  if (!(theta > 0.0 && theta < std::numbers::pi)) throw InvalidArgument("c0_bounds: theta must lie in (0, pi)");
  if (!(f_min > 0.0 && f_max >= f_min)) throw InvalidArgument("c0_bounds: need 0 < min f <= max f");

  const double p = pq.p, q = pq.q;
  const double gap = p - q;
  const double one_minus_cos = 1.0 - std::cos(theta);
  const double sin_sq = std::sin(theta) * std::sin(theta);
  const double two_factor = std::pow(2.0, -0.5 * (n + 1.0 - q));

  BoundSet b;
  if (n + 1.0 - q >= 0.0) {
    b.case_tag = "q <= n+1";
    b.power_lower = two_factor * std::pow(one_minus_cos, gap) / std::pow(sin_sq, p - 1.0) / f_max;
    b.power_upper = std::pow(sin_sq, gap) / std::pow(one_minus_cos, n + gap) / f_min;
  } else {
    b.case_tag = "q > n+1";
    b.power_lower = std::pow(one_minus_cos, gap) / std::pow(sin_sq, n + gap) / f_max;
    b.power_upper = two_factor * std::pow(sin_sq, gap) / std::pow(one_minus_cos, p - 1.0) / f_min;
  }
  b.h_lower = std::pow(b.power_lower, 1.0 / gap);
  b.h_upper = std::pow(b.power_upper, 1.0 / gap);
  b.grad_bound_factor = std::sqrt(1.0 + 1.0 / std::tan(theta) / std::tan(theta));
  return b;
}

BoundSet c0_bounds(const ProblemSpec& prob) {
  const auto [lo, hi] = std::minmax_element(prob.f.begin(), prob.f.end());
  return c0_bounds(prob.cap().theta(), prob.cap().n(), prob.pq, *lo, *hi);
}

GradientBound gradient_bound(const SupportField& h) {
  GradientBound out;
  double hmax = 0.0;
  for (std::size_t k = 0; k < h.values().size(); ++k) {
    out.computed = std::max(out.computed, std::sqrt(grad_at(h.values(), h.grid(), k).norm_squared()));
    hmax = std::max(hmax, h.values()[k]);
  }
  out.bound = hmax / h.spec().sin_theta();
  return out;
}

bool VerificationReport::passed() const { return failures() == 0; }

int VerificationReport::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; }));
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["passed"] = passed();
  j["failures"] = failures();
  j["spacing"] = spacing;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json item;
    item["name"] = c.name;
    item["value"] = c.value;
    if (std::isfinite(c.bound)) {
      item["bound"] = c.bound;
    } else {
      item["bound"] = nullptr;
    }
    item["pass"] = c.pass;
    item["slack"] = std::isfinite(c.slack) ? nlohmann::ordered_json(c.slack) : nlohmann::ordered_json(nullptr);
    item["informational"] = c.informational;
    arr.push_back(std::move(item));
  }
  j["checks"] = std::move(arr);
  return j;
}

std::string VerificationReport::table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %14s %14s %14s  %s\n", "check", "value", "bound", "slack", "result");
  os << line;
  for (const auto& c : checks) {
    const char* result = c.informational ? "info" : (c.pass ? "PASS" : "FAIL");
    if (std::isfinite(c.bound)) {
      std::snprintf(line, sizeof line, "%-22s %14.6e %14.6e %14.6e  %s\n", c.name.c_str(), c.value, c.bound, c.slack,
                    result);
    } else {
      std::snprintf(line, sizeof line, "%-22s %14.6e %14s %14s  %s\n", c.name.c_str(), c.value, "-", "-", result);
    }
    os << line;
  }
  std::snprintf(line, sizeof line, "%d failure(s)\n", failures());
  os << line;
  return os.str();
}

namespace {

CheckResult upper_check(std::string name, double value, double bound, double adjusted) {
  return {std::move(name), value, bound, value <= adjusted, adjusted - value, false};
}

CheckResult lower_check(std::string name, double value, double bound, double adjusted) {
  return {std::move(name), value, bound, value >= adjusted, value - adjusted, false};
}

}  // namespace

VerificationReport verify(const SupportField& h, const ProblemSpec& prob, const VerificationOptions& opts) {
  const auto& grid = h.grid();
  const auto& cap = grid.spec();
  VerificationReport rep;
  rep.spacing = grid.spacing();
  const double discrete = opts.slack_constant * rep.spacing * rep.spacing;
  const double rel = opts.relative_tolerance;

  const auto& hv = h.values();
  const auto [hmin_it, hmax_it] = std::minmax_element(hv.begin(), hv.end());
  const double hmin = *hmin_it, hmax = *hmax_it;

  const auto bounds = c0_bounds(prob);
  rep.checks.push_back(lower_check("c0_lower", hmin, bounds.h_lower, bounds.h_lower * (1.0 - rel) - discrete));
  rep.checks.push_back(upper_check("c0_upper", hmax, bounds.h_upper, bounds.h_upper * (1.0 + rel) + discrete));

  const auto gb = gradient_bound(h);
  rep.checks.push_back(upper_check("gradient_bound", gb.computed, gb.bound, gb.bound * (1.0 + rel) + discrete));

  const double scale = std::max(1.0, hmax);
  const auto bi = boundary_identity_check(h, discrete * scale);
  rep.checks.push_back(upper_check("boundary_h_kn", bi.max_h_kn, bi.threshold, bi.threshold));
  rep.checks.push_back(upper_check("boundary_u_identity", bi.max_u_identity, bi.threshold, bi.threshold));

  ScalarField v(hv.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::log(hv[k]);
  double robin = 0.0;
  for (double d : normal_derivative(v, grid)) robin = std::max(robin, std::abs(d - cap.cot_theta()));
  rep.checks.push_back(upper_check("robin_residual", robin, discrete, discrete));

  const auto density = measure_density(h, prob.pq);
  const auto l = l_field(grid);
  double measure_err = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double e = std::abs(density[k] / (l[k] * prob.f[k]) - 1.0);
    measure_err = std::isfinite(e) ? std::max(measure_err, e) : std::numeric_limits<double>::infinity();
  }
  rep.checks.push_back(upper_check("measure_consistency", measure_err, discrete, discrete));

  // No computable constant exists for the logarithmic gradient bound.
  double log_grad = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) log_grad = std::max(log_grad, std::sqrt(grad_at(v, grid, k).norm_squared()));
  rep.checks.push_back({"log_gradient", log_grad, std::numeric_limits<double>::infinity(), true,
                        std::numeric_limits<double>::infinity(), true});
  return rep;
}

}  // namespace capdual
