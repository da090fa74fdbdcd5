#include <cmath>
#include <numbers>
#include <string>

#include "capdual/errors.hpp"
#include "capdual/run_config.hpp"
#include "doctest.h"

using namespace capdual;
using nlohmann::json;

namespace {

json base_config() {
  return json::parse(R"({
    "theta": 60, "angle_unit": "deg", "n": 2, "p": 3, "q": 1,
    "grid": {"nr": 16, "nphi": 16},
    "f": {"kind": "harmonic", "c0": 1, "epsilon": 0.2, "m": 2}
  })");
}

std::string config_error(const json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("run_config") {
  TEST_CASE("parses a harmonic config in degrees") {
    const auto c = RunConfig::from_json(base_config());
    CHECK(c.theta() == doctest::Approx(std::numbers::pi / 3).epsilon(1e-15));
    CHECK(c.nr == 16);
    CHECK(c.f.kind == DensitySpec::Kind::Harmonic);
    CHECK(c.f.radial_mode == 2);
    CHECK_FALSE(c.f.radial_profile(c.cap(), c.pq).has_value());
    const auto prob = c.problem();
    CHECK(prob.f.size() == 256);
  }

  TEST_CASE("radians, defaults and n = 1") {
    auto j = base_config();
    j["theta"] = 1.0;
    j["angle_unit"] = "rad";
    j["n"] = 1;
    j["f"] = {{"kind", "constant"}, {"c", 2.0}};
    const auto c = RunConfig::from_json(j);
    CHECK(c.theta() == 1.0);
    CHECK(c.nphi == 1);
    CHECK(c.make_grid()->size() == 16);
    CHECK(c.solver.tolerance == 1e-9);
    CHECK(c.schedule.adaptive);
  }

  TEST_CASE("p <= q is rejected with the constraint in the message") {
    auto j = base_config();
    j["p"] = 1;
    const auto msg = config_error(j);
    CHECK(msg.find("p > q") != std::string::npos);
    j["p"] = 0.5;
    CHECK(config_error(j).find("p > q") != std::string::npos);
  }

  TEST_CASE("malformed configs") {
    auto j = base_config();
    j.erase("theta");
    CHECK(config_error(j).find("theta") != std::string::npos);
    j = base_config();
    j["angle_unit"] = "grad";
    CHECK_FALSE(config_error(j).empty());
    j = base_config();
    j["theta"] = 95;
    CHECK(config_error(j).find("theta") != std::string::npos);
    j = base_config();
    j["grid"]["nphi"] = 15;
    CHECK_FALSE(config_error(j).empty());
    j = base_config();
    j["f"]["kind"] = "spiral";
    CHECK(config_error(j).find("spiral") != std::string::npos);
    j = base_config();
    j["f"]["epsilon"] = "big";
    CHECK(config_error(j).find("epsilon") != std::string::npos);
    j = base_config();
    j["solver"] = {{"backtrack", 2.0}};
    CHECK_FALSE(config_error(j).empty());
    j = base_config();
    j["solver"] = {{"t_values", {0.5, 0.2, 1.0}}};
    CHECK_FALSE(config_error(j).empty());
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("density must be positive on the grid") {
    auto j = base_config();
    j["f"]["epsilon"] = 1.5;
    CHECK(config_error(j).find("positive") != std::string::npos);
    j["f"] = {{"kind", "radial"}, {"coefficients", {0.2, -1.0}}};
    CHECK(config_error(j).find("positive") != std::string::npos);
    j["f"] = {{"kind", "constant"}, {"c", 0.0}};
    CHECK_FALSE(config_error(j).empty());
  }

  TEST_CASE("density kinds") {
    const auto c = RunConfig::from_json(base_config());
    const auto g = c.make_grid();
    const auto f0 = homotopy_start_density(*g, c.pq);

    auto d = DensitySpec::from_json({{"kind", "manufactured"}, {"c", 2.0}});
    auto f = d.evaluate(*g, c.pq);
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(f[k] == doctest::Approx(0.25 * f0[k]).epsilon(1e-14));
    CHECK(d.manufactured_scale() == 2.0);
    CHECK(DensitySpec::from_json({{"kind", "homotopy_start"}}).manufactured_scale() == 1.0);
    CHECK_FALSE(DensitySpec::from_json({{"kind", "constant"}, {"c", 1.0}}).manufactured_scale().has_value());

    d = DensitySpec::from_json({{"kind", "radial"}, {"coefficients", {1.0, 0.5}}, {"times_f0", true}});
    f = d.evaluate(*g, c.pq);
    const auto prof = d.radial_profile(c.cap(), c.pq);
    REQUIRE(prof.has_value());
    for (std::size_t k = 0; k < f.size(); ++k) {
      CHECK(f[k] == doctest::Approx(f0[k] * (1.0 + 0.5 * std::cos(g->node_r(k)))).epsilon(1e-13));
      CHECK((*prof)(g->node_r(k)) == doctest::Approx(f[k]).epsilon(1e-13));
    }

    d = DensitySpec::from_json({{"kind", "harmonic"}, {"epsilon", 0.3}, {"m", 0}, {"radial_mode", 2}});
    CHECK(d.radial_profile(c.cap(), c.pq).has_value());
    d = DensitySpec::from_json({{"kind", "harmonic"}, {"c0", 2.0}, {"epsilon", 0.3}, {"m", 3}, {"phase", 0.4}});
    f = d.evaluate(*g, c.pq);
    const double s = g->spec().sin_theta();
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double ex = 2.0 * (1.0 + 0.3 * std::cos(3 * g->node_phi(k) - 0.4) * std::pow(std::sin(g->node_r(k)) / s, 3));
      CHECK(f[k] == doctest::Approx(ex).epsilon(1e-14));
    }
  }

  TEST_CASE("JSON roundtrip and regridding") {
    auto j = base_config();
    j["solver"] = {{"tolerance", 1e-10}, {"t_values", {0.5, 1.0}}};
    j["output"] = {{"solution", "a.json"}};
    const auto c = RunConfig::from_json(j);
    const auto c2 = RunConfig::from_json(json::parse(c.to_json().dump()));
    CHECK(c2.to_json() == c.to_json());
    CHECK(c2.solver.tolerance == 1e-10);
    CHECK_FALSE(c2.schedule.adaptive);
    CHECK(c2.output.solution == "a.json");
    const auto c3 = c.with_grid(40, 24);
    CHECK(c3.make_grid()->nr() == 40);
    CHECK(c3.make_grid()->nphi() == 24);
    CHECK(to_string(DensitySpec::Kind::HomotopyStart) == "homotopy_start");
  }
}
