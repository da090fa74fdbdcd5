#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "capdual/apriori.hpp"
#include "capdual/axisym_oracle.hpp"
#include "capdual/capillary_body.hpp"
#include "capdual/commands.hpp"
#include "capdual/continuation.hpp"
#include "capdual/errors.hpp"
#include "capdual/run_config.hpp"

namespace py = pybind11;
using namespace capdual;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// Nodal fields come back as (nr, nphi) arrays.
py::array_t<double> to_grid_array(const ScalarField& v, const PolarGrid& g) {
  py::array_t<double> out({g.nr(), g.nphi()});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ScalarField from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, const PolarGrid& g) {
  if (static_cast<std::size_t>(a.size()) != g.size()) {
    throw InvalidArgument("expected " + std::to_string(g.size()) + " nodal values, got " + std::to_string(a.size()));
  }
  return ScalarField(a.data(), a.data() + a.size());
}

struct Solution {
  GridPtr grid;
  ProblemSpec problem;
  ContinuationResult result;

  SupportField support() const { return result.support(grid); }
};

Solution solve_problem(const ProblemSpec& prob, const SolverConfig& cfg, const HomotopySchedule& sched) {
  ContinuationResult res;
  {
    py::gil_scoped_release release;
    res = continuation_solve(prob, cfg, sched);
  }
  return {prob.grid, prob, std::move(res)};
}

py::dict report_dict(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump()).cast<py::dict>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-difference solver for the capillary L_p dual Minkowski problem on a spherical cap";

  py::register_exception<Error>(m, "CapdualError");
  py::register_exception<InvalidExponents>(m, "InvalidExponents", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonConvex>(m, "NonConvex", PyExc_RuntimeError);
  py::register_exception<NotAxisymmetric>(m, "NotAxisymmetric", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<CapSpec>(m, "CapSpec")
      .def(py::init<double, int>(), py::arg("theta"), py::arg("n") = 2)
      .def_property_readonly("theta", &CapSpec::theta)
      .def_property_readonly("n", &CapSpec::n)
      .def_property_readonly("area", &CapSpec::area)
      .def("__repr__", [](const CapSpec& c) {
        std::ostringstream os;
        os << "CapSpec(theta=" << c.theta() << ", n=" << c.n() << ")";
        return os.str();
      });

  py::class_<ExponentPair>(m, "ExponentPair")
      .def(py::init([](double p, double q) {
             ExponentPair pq{p, q};
             pq.validate();
             return pq;
           }),
           py::arg("p"), py::arg("q"))
      .def_readonly("p", &ExponentPair::p)
      .def_readonly("q", &ExponentPair::q);

  py::class_<PolarGrid, std::shared_ptr<PolarGrid>>(m, "PolarGrid")
      .def(py::init([](const CapSpec& cap, int nr, int nphi) {
             return std::const_pointer_cast<PolarGrid>(PolarGrid::make(cap, nr, nphi));
           }),
           py::arg("cap"), py::arg("nr"), py::arg("nphi"))
      .def_property_readonly("nr", &PolarGrid::nr)
      .def_property_readonly("nphi", &PolarGrid::nphi)
      .def_property_readonly("spacing", &PolarGrid::spacing)
      .def_property_readonly("r", [](const PolarGrid& g) { return to_array(g.r_nodes()); })
      .def_property_readonly("phi", [](const PolarGrid& g) { return to_array(g.phi_nodes()); })
      .def("l_field", [](const PolarGrid& g) { return to_grid_array(l_field(g), g); })
      .def(
          "homotopy_start_density",
          [](const PolarGrid& g, const ExponentPair& pq) { return to_grid_array(homotopy_start_density(g, pq), g); },
          py::arg("pq"))
      .def(
          "integrate",
          [](const PolarGrid& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
            return integrate(from_array(a, g), g);
          },
          py::arg("values"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("tolerance", &SolverConfig::tolerance)
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("backtrack", &SolverConfig::backtrack)
      .def_readwrite("min_step", &SolverConfig::min_step)
      .def_readwrite("convexity_floor", &SolverConfig::convexity_floor);

  py::class_<BoundSet>(m, "BoundSet")
      .def_readonly("power_lower", &BoundSet::power_lower)
      .def_readonly("power_upper", &BoundSet::power_upper)
      .def_readonly("h_lower", &BoundSet::h_lower)
      .def_readonly("h_upper", &BoundSet::h_upper)
      .def_readonly("grad_bound_factor", &BoundSet::grad_bound_factor)
      .def_readonly("case_tag", &BoundSet::case_tag);

  m.def(
      "c0_bounds",
      [](double theta, int n, double p, double q, double f_min, double f_max) {
        return c0_bounds(theta, n, {p, q}, f_min, f_max);
      },
      py::arg("theta"), py::arg("n"), py::arg("p"), py::arg("q"), py::arg("f_min"), py::arg("f_max"));

  py::class_<Solution>(m, "Solution")
      .def_property_readonly("grid", [](const Solution& s) { return std::const_pointer_cast<PolarGrid>(s.grid); })
      .def_property_readonly("converged", [](const Solution& s) { return s.result.converged(); })
      .def_property_readonly("status", [](const Solution& s) { return to_string(s.result.report.status); })
      .def_property_readonly("t_reached", [](const Solution& s) { return s.result.report.t_reached; })
      .def_property_readonly("final_residual", [](const Solution& s) { return s.result.report.final_residual; })
      .def_property_readonly("h", [](const Solution& s) { return to_grid_array(s.support().values(), *s.grid); })
      .def_property_readonly("report", [](const Solution& s) { return report_dict(s.result.report.to_json()); })
      .def("verify", [](const Solution& s) { return report_dict(verify(s.support(), s.problem).to_json()); })
      .def("convexity_margin", [](const Solution& s) { return convexity_margin(s.support()); })
      .def("measure_density",
           [](const Solution& s) { return to_grid_array(measure_density(s.support(), s.problem.pq), *s.grid); })
      .def("contact_angle", [](const Solution& s) { return to_array(contact_angle(embed(s.support()))); })
      .def("mesh", [](const Solution& s) {
        const auto mesh = embed(s.support());
        py::array_t<double> v({static_cast<py::ssize_t>(mesh.vertices.size()), py::ssize_t{3}});
        py::array_t<int> f({static_cast<py::ssize_t>(mesh.faces.size()), py::ssize_t{3}});
        auto vv = v.mutable_unchecked<2>();
        auto ff = f.mutable_unchecked<2>();
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
          for (int d = 0; d < 3; ++d) vv(static_cast<py::ssize_t>(i), d) = mesh.vertices[i][static_cast<std::size_t>(d)];
        }
        for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
          for (int d = 0; d < 3; ++d) ff(static_cast<py::ssize_t>(i), d) = mesh.faces[i][static_cast<std::size_t>(d)];
        }
        return py::make_tuple(v, f);
      });

  m.def(
      "solve",
      [](const std::shared_ptr<PolarGrid>& grid, double p, double q,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& f, const SolverConfig& cfg) {
        ProblemSpec prob{grid, {p, q}, from_array(f, *grid)};
        prob.validate();
        return solve_problem(prob, cfg, {});
      },
      py::arg("grid"), py::arg("p"), py::arg("q"), py::arg("f"), py::arg("config") = SolverConfig{},
      "Continuation solve for density values f on the grid nodes.");

  m.def(
      "solve_config",
      [](const std::string& config_json) {
        const auto cfg = RunConfig::from_json(nlohmann::json::parse(config_json));
        return solve_problem(cfg.problem(), cfg.solver, cfg.schedule);
      },
      py::arg("config_json"), "Continuation solve for a run config given as a JSON string.");

  m.def(
      "radial_solve",
      [](double theta, int n, double p, double q, const RadialProfile& profile, int intervals) {
        const auto prob = RadialProblem::make(CapSpec(theta, n), {p, q}, profile, intervals);
        RadialSolution sol;
        {
          py::gil_scoped_release release;
          sol = radial_solve(prob);
        }
        return py::dict(py::arg("r") = to_array(sol.r), py::arg("h") = to_array(sol.h),
                        py::arg("status") = to_string(sol.status), py::arg("final_residual") = sol.final_residual);
      },
      py::arg("theta"), py::arg("n"), py::arg("p"), py::arg("q"), py::arg("f"), py::arg("intervals"),
      "1D solve for a rotationally symmetric density f(r).");

  m.def(
      "radial_start_profile",
      [](double theta, int n, double p, double q) { return radial_start_profile(CapSpec(theta, n), {p, q}); },
      py::arg("theta"), py::arg("n"), py::arg("p"), py::arg("q"));

  m.def(
      "oracle_compare",
      [](const Solution& s, const RadialProfile& profile, int fine_factor) {
        const auto rep = oracle_compare(s.problem, s.support(), profile, fine_factor);
        return py::dict(py::arg("max_discrepancy") = rep.max_discrepancy,
                        py::arg("l2_discrepancy") = rep.l2_discrepancy,
                        py::arg("angular_variation") = rep.angular_variation, py::arg("threshold") = rep.threshold,
                        py::arg("passed") = rep.passed());
      },
      py::arg("solution"), py::arg("f"), py::arg("fine_factor") = 4);
}
