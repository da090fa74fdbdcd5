#include "capdual/run_config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "capdual/errors.hpp"

namespace capdual {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(DensitySpec::Kind kind) {
  switch (kind) {
    case DensitySpec::Kind::Constant:
      return "constant";
    case DensitySpec::Kind::Radial:
      return "radial";
    case DensitySpec::Kind::Harmonic:
      return "harmonic";
    case DensitySpec::Kind::HomotopyStart:
      return "homotopy_start";
    case DensitySpec::Kind::Manufactured:
      return "manufactured";
  }
  return "unknown";
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config is missing required key '") + key + "'");
  return get_or<T>(j, key, T{});
}

double start_density_at(double r, const CapSpec& cap, const ExponentPair& pq) {
  return radial_start_profile(cap, pq)(r);
}

}  // namespace

DensitySpec DensitySpec::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("density spec 'f' must be an object");
  DensitySpec d;
  const auto kind = require<std::string>(j, "kind");
  if (kind == "constant") {
    d.kind = Kind::Constant;
    d.c = require<double>(j, "c");
  } else if (kind == "radial") {
    d.kind = Kind::Radial;
    d.coefficients = require<std::vector<double>>(j, "coefficients");
    if (d.coefficients.empty()) throw ConfigError("radial density needs at least one coefficient");
    d.times_f0 = get_or<bool>(j, "times_f0", false);
  } else if (kind == "harmonic") {
    d.kind = Kind::Harmonic;
    d.c0 = get_or<double>(j, "c0", 1.0);
    d.epsilon = require<double>(j, "epsilon");
    d.m = require<int>(j, "m");
    d.radial_mode = get_or<int>(j, "radial_mode", d.m);
    d.phase = get_or<double>(j, "phase", 0.0);
    d.times_f0 = get_or<bool>(j, "times_f0", false);
    if (d.m < 0 || d.radial_mode < 0) throw ConfigError("harmonic density needs m >= 0 and radial_mode >= 0");
  } else if (kind == "homotopy_start") {
    d.kind = Kind::HomotopyStart;
  } else if (kind == "manufactured") {
    d.kind = Kind::Manufactured;
    d.c = require<double>(j, "c");
    if (!(d.c > 0.0)) throw ConfigError("manufactured density needs c > 0");
  } else {
    throw ConfigError("unknown density kind '" + kind +
                      "' (expected constant, radial, harmonic, homotopy_start or manufactured)");
  }
  return d;
}

ordered_json DensitySpec::to_json() const {
  ordered_json j;
  j["kind"] = to_string(kind);
  switch (kind) {
    case Kind::Constant:
    case Kind::Manufactured:
      j["c"] = c;
      break;
    case Kind::Radial:
      j["coefficients"] = coefficients;
      j["times_f0"] = times_f0;
      break;
    case Kind::Harmonic:
      j["c0"] = c0;
      j["epsilon"] = epsilon;
      j["m"] = m;
      j["radial_mode"] = radial_mode;
      j["phase"] = phase;
      j["times_f0"] = times_f0;
      break;
    case Kind::HomotopyStart:
      break;
  }
  return j;
}

std::optional<RadialProfile> DensitySpec::radial_profile(const CapSpec& cap, const ExponentPair& pq) const {
  const auto start = radial_start_profile(cap, pq);
  switch (kind) {
    case Kind::Constant: {
      const double value = c;
      return RadialProfile([value](double) { return value; });
    }
    case Kind::Radial: {
      const auto coef = coefficients;
      const bool mult = times_f0;
      return RadialProfile([coef, mult, start](double r) {
        const double x = std::cos(r);
        double acc = 0.0;
        for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * x + *it;
        return mult ? acc * start(r) : acc;
      });
    }
    case Kind::Harmonic: {
      if (m != 0 && epsilon != 0.0) return std::nullopt;
      // m = 0: cos(-phase) is a constant factor.
      const double amp = epsilon * std::cos(phase);
      const double base = c0;
      const int mode = radial_mode;
      const double s = cap.sin_theta();
      const bool mult = times_f0;
      return RadialProfile([=](double r) {
        const double v = base * (1.0 + amp * std::pow(std::sin(r) / s, mode));
        return mult ? v * start(r) : v;
      });
    }
    case Kind::HomotopyStart:
      return start;
    case Kind::Manufactured: {
      const double scale = std::pow(c, pq.q - pq.p);
      return RadialProfile([scale, start](double r) { return scale * start(r); });
    }
  }
  return std::nullopt;
}

std::optional<double> DensitySpec::manufactured_scale() const {
  if (kind == Kind::HomotopyStart) return 1.0;
  if (kind == Kind::Manufactured) return c;
  return std::nullopt;
}

ScalarField DensitySpec::evaluate(const PolarGrid& grid, const ExponentPair& pq) const {
  const auto& cap = grid.spec();
  ScalarField f(grid.size());
  if (kind == Kind::HomotopyStart || kind == Kind::Manufactured) {
    // Use the grid's own f_0 so that h = c l is matched node for node.
    f = homotopy_start_density(grid, pq);
    if (kind == Kind::Manufactured) {
      const double scale = std::pow(c, pq.q - pq.p);
      for (double& v : f) v *= scale;
    }
    return f;
  }
  if (kind == Kind::Harmonic) {
    const double s = cap.sin_theta();
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double r = grid.node_r(k);
      const double ang = std::cos(m * grid.node_phi(k) - phase);
      double v = c0 * (1.0 + epsilon * ang * std::pow(std::sin(r) / s, radial_mode));
      if (times_f0) v *= start_density_at(r, cap, pq);
      f[k] = v;
    }
    return f;
  }
  const auto profile = *radial_profile(cap, pq);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = profile(grid.node_r(k));
  return f;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.theta_value = require<double>(j, "theta");
  c.angle_unit = require<std::string>(j, "angle_unit");
  if (c.angle_unit != "deg" && c.angle_unit != "rad") {
    throw ConfigError("angle_unit must be \"deg\" or \"rad\", got \"" + c.angle_unit + "\"");
  }
  c.n = get_or<int>(j, "n", 2);
  c.pq.p = require<double>(j, "p");
  c.pq.q = require<double>(j, "q");
  if (!(c.pq.p > c.pq.q)) {
    std::ostringstream os;
    os << "exponents must satisfy p > q (got p = " << c.pq.p << ", q = " << c.pq.q << ")";
    throw ConfigError(os.str());
  }
  const double th = c.theta();
  if (!(th > 0.0 && th < std::numbers::pi / 2)) {
    throw ConfigError("theta must lie in (0, pi/2), got " + std::to_string(th) + " rad");
  }
  if (c.n != 1 && c.n != 2) throw ConfigError("n must be 1 or 2");

  const json grid = j.contains("grid") ? j.at("grid") : json::object();
  c.nr = get_or<int>(grid, "nr", 32);
  c.nphi = c.n == 1 ? 1 : get_or<int>(grid, "nphi", c.nr);
  if (c.nr < 4) throw ConfigError("grid.nr must be at least 4");
  if (c.n == 2 && (c.nphi < 4 || c.nphi % 2 != 0)) throw ConfigError("grid.nphi must be even and at least 4");

  if (!j.contains("f")) throw ConfigError("config is missing the density spec 'f'");
  c.f = DensitySpec::from_json(j.at("f"));

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    c.solver.tolerance = get_or<double>(s, "tolerance", c.solver.tolerance);
    c.solver.max_iterations = get_or<int>(s, "max_iterations", c.solver.max_iterations);
    c.solver.backtrack = get_or<double>(s, "backtrack", c.solver.backtrack);
    c.solver.min_step = get_or<double>(s, "min_step", c.solver.min_step);
    c.solver.convexity_floor = get_or<double>(s, "convexity_floor", c.solver.convexity_floor);
    c.schedule.initial_step = get_or<double>(s, "initial_t_step", c.schedule.initial_step);
    c.schedule.min_step = get_or<double>(s, "min_t_step", c.schedule.min_step);
    c.schedule.max_step = get_or<double>(s, "max_t_step", c.schedule.max_step);
    if (s.contains("t_values")) c.schedule = HomotopySchedule::fixed(get_or<std::vector<double>>(s, "t_values", {}));
  }
  try {
    c.solver.validate();
    c.schedule.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("solver settings: ") + e.what());
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    c.output.solution = get_or<std::string>(o, "solution", "");
    c.output.report = get_or<std::string>(o, "report", "");
    c.output.mesh = get_or<std::string>(o, "mesh", "");
  }

  // Positivity of f on the configured grid.
  c.problem();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["theta"] = theta_value;
  j["angle_unit"] = angle_unit;
  j["n"] = n;
  j["p"] = pq.p;
  j["q"] = pq.q;
  j["grid"] = {{"nr", nr}, {"nphi", nphi}};
  j["f"] = f.to_json();
  ordered_json s;
  s["tolerance"] = solver.tolerance;
  s["max_iterations"] = solver.max_iterations;
  s["backtrack"] = solver.backtrack;
  s["min_step"] = solver.min_step;
  s["convexity_floor"] = solver.convexity_floor;
  s["initial_t_step"] = schedule.initial_step;
  s["min_t_step"] = schedule.min_step;
  s["max_t_step"] = schedule.max_step;
  if (!schedule.adaptive) s["t_values"] = schedule.t_values;
  j["solver"] = std::move(s);
  if (!output.solution.empty() || !output.report.empty() || !output.mesh.empty()) {
    j["output"] = {{"solution", output.solution}, {"report", output.report}, {"mesh", output.mesh}};
  }
  return j;
}

double RunConfig::theta() const {
  return angle_unit == "deg" ? theta_value * std::numbers::pi / 180.0 : theta_value;
}

CapSpec RunConfig::cap() const { return CapSpec(theta(), n); }

GridPtr RunConfig::make_grid() const { return PolarGrid::make(cap(), nr, nphi); }

RunConfig RunConfig::with_grid(int nr_new, int nphi_new) const {
  RunConfig c = *this;
  c.nr = nr_new;
  c.nphi = n == 1 ? 1 : nphi_new;
  return c;
}

ProblemSpec RunConfig::problem() const {
  try {
    return problem(make_grid());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

ProblemSpec RunConfig::problem(const GridPtr& grid) const {
  ProblemSpec prob{grid, pq, f.evaluate(*grid, pq)};
  for (std::size_t k = 0; k < prob.f.size(); ++k) {
    if (!(prob.f[k] > 0.0) || !std::isfinite(prob.f[k])) {
      std::ostringstream os;
      os << "density '" << to_string(f.kind) << "' is not strictly positive on the grid (f = " << prob.f[k]
         << " at r = " << grid->node_r(k) << ", phi = " << grid->node_phi(k) << ")";
      throw ConfigError(os.str());
    }
  }
  return prob;
}

}  // namespace capdual
