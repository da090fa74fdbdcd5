// capdual: solve, verify, convergence and oracle runs from JSON configs.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capdual/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Capillary L_p dual Minkowski problem on a spherical cap"};
  app.require_subcommand(1);

  capdual::SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Run the continuation solver for a config");
  solve->add_option("--config", solve_opts.config_path, "Run config (JSON)")->required();
  solve->add_option("--mesh", solve_opts.mesh_path, "Write the reconstructed hypersurface as OBJ");
  solve->add_option("--out", solve_opts.solution_path, "Solution file (default <config stem>_solution.json)");
  solve->add_option("--report", solve_opts.report_path, "Solve report (default <config stem>_report.json)");

  std::string solution_path, verify_json;
  auto* verify = app.add_subcommand("verify", "Check a priori bounds and boundary identities on a solution");
  verify->add_option("--solution", solution_path, "Solution file written by solve")->required();
  verify->add_option("--json", verify_json, "Also write the report as JSON");

  std::string conv_config, conv_json;
  std::vector<int> grids{16, 32, 64};
  auto* conv = app.add_subcommand("convergence", "Refinement study for a manufactured density");
  conv->add_option("--config", conv_config, "Run config (JSON)")->required();
  conv->add_option("--grids", grids, "Grid sizes N (N x N grids)")->delimiter(',');
  conv->add_option("--json", conv_json, "Also write the table as JSON");

  std::string oracle_config;
  auto* oracle = app.add_subcommand("oracle", "Compare a radial run with the 1D solver");
  oracle->add_option("--config", oracle_config, "Run config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : capdual::kExitBadInput;
  }

  if (*solve) return capdual::cmd_solve(solve_opts, std::cout, std::cerr);
  if (*verify) return capdual::cmd_verify(solution_path, std::cout, std::cerr, verify_json);
  if (*conv) return capdual::cmd_convergence(conv_config, grids, std::cout, std::cerr, conv_json);
  if (*oracle) return capdual::cmd_oracle(oracle_config, std::cout, std::cerr);
  return capdual::kExitBadInput;
}
