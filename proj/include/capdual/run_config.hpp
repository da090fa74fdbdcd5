#pragma once

// JSON run configuration.
//
//   {
//     "theta": 60, "angle_unit": "deg",          // or "rad"
//     "n": 2, "p": 3, "q": 1,
//     "grid": {"nr": 64, "nphi": 64},            // nphi omitted for n = 1
//     "f": {"kind": "harmonic", "c0": 1, "epsilon": 0.2, "m": 2},
//     "solver": {"tolerance": 1e-9, "max_iterations": 40, "backtrack": 0.5,
//                "min_step": 1e-10, "convexity_floor": 1e-8,
//                "initial_t_step": 0.25, "min_t_step": 0.0009765625, "max_t_step": 1},
//     "output": {"solution": "...", "report": "...", "mesh": "..."}
//   }
//
// Density kinds:
//   constant        f = c
//   radial          f = sum_k coefficients[k] cos^k r
//   harmonic        f = c0 (1 + epsilon cos(m phi - phase) (sin r / sin theta)^radial_mode)
//   homotopy_start  f = f_0, whose solution is h = l
//   manufactured    f = c^{q-p} f_0, whose solution is h = c l
// radial and harmonic accept "times_f0": true to multiply by f_0.

#include <optional>
#include <string>

#include "capdual/axisym_oracle.hpp"
#include "capdual/continuation.hpp"
#include "capdual/ma_system.hpp"
#include "json.hpp"

namespace capdual {

struct DensitySpec {
  enum class Kind { Constant, Radial, Harmonic, HomotopyStart, Manufactured };

  Kind kind = Kind::HomotopyStart;
  double c = 1.0;                    // constant, manufactured
  std::vector<double> coefficients;  // radial
  double c0 = 1.0;                   // harmonic
  double epsilon = 0.0;
  int m = 0;
  int radial_mode = 0;
  double phase = 0.0;
  bool times_f0 = false;

  static DensitySpec from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  ScalarField evaluate(const PolarGrid& grid, const ExponentPair& pq) const;
  /// The same density as a function of r, when it has no angular dependence.
  std::optional<RadialProfile> radial_profile(const CapSpec& cap, const ExponentPair& pq) const;
  /// Exact solution scale c for manufactured and homotopy_start densities (h = c l).
  std::optional<double> manufactured_scale() const;
};

std::string to_string(DensitySpec::Kind kind);

struct OutputPaths {
  std::string solution;
  std::string report;
  std::string mesh;
};

struct RunConfig {
  double theta_value = 0.0;  // as written
  std::string angle_unit = "rad";
  int n = 2;
  ExponentPair pq;
  int nr = 32;
  int nphi = 32;
  DensitySpec f;
  SolverConfig solver;
  HomotopySchedule schedule;
  OutputPaths output;

  /// Throws ConfigError on malformed input, p <= q, theta outside (0, pi/2),
  /// bad grid sizes or a density that is not positive on the grid.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::ordered_json to_json() const;

  double theta() const;
  CapSpec cap() const;
  GridPtr make_grid() const;
  /// Same configuration on an nr x nphi grid (nphi forced to 1 for n = 1).
  RunConfig with_grid(int nr_new, int nphi_new) const;
  ProblemSpec problem() const;
  ProblemSpec problem(const GridPtr& grid) const;
};

}  // namespace capdual
