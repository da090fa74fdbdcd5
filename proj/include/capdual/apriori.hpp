#pragma once

// Closed-form a priori bounds for positive solutions with p > q, and the
// verification suite that checks them (plus boundary identities and measure
// consistency) on computed solutions.

#include <string>
#include <vector>

#include "capdual/capillary_body.hpp"
#include "capdual/ma_system.hpp"
#include "json.hpp"

namespace capdual {

struct BoundSet {
  // Bounds on h^{p-q} ...
  double power_lower = 0.0;
  double power_upper = 0.0;
  // ... and on h itself, after taking the (p-q)-th root.
  double h_lower = 0.0;
  double h_upper = 0.0;
  double grad_bound_factor = 0.0;  // (1 + cot^2 theta)^{1/2} = 1 / sin theta
  std::string case_tag;            // "q <= n+1" or "q > n+1"
};

/// theta may lie anywhere in (0, pi) here.  Throws InvalidExponents if p <= q.
BoundSet c0_bounds(double theta, int n, const ExponentPair& pq, double f_min, double f_max);
BoundSet c0_bounds(const ProblemSpec& prob);

struct GradientBound {
  double computed = 0.0;  // max |grad h| over nodes
  double bound = 0.0;     // max h / sin theta
};

GradientBound gradient_bound(const SupportField& h);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  double slack = 0.0;          // distance to the tolerance-adjusted bound, positive when passing
  bool informational = false;  // reported only, never fails
};

struct VerificationOptions {
  double relative_tolerance = 1e-6;
  double slack_constant = 10.0;  // discrete slack is slack_constant * spacing^2
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  double spacing = 0.0;

  bool passed() const;
  int failures() const;
  const CheckResult* find(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
  std::string table() const;
};

VerificationReport verify(const SupportField& h, const ProblemSpec& prob, const VerificationOptions& opts = {});

}  // namespace capdual
