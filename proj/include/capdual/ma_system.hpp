#pragma once

// Discrete Monge-Ampere system in the log variable v = log h:
//
//   log det(Hess v + grad v (x) grad v + sigma)
//       = log f + (p - q) v + (n + 1 - q)/2 log(1 + |grad v|^2)   interior rings
//   d_r v = cot theta                                            boundary ring
//
// One unknown per grid node; the row of node k is its interior equation or,
// on the outermost ring, its Robin condition.

#include <Eigen/SparseCore>
#include <vector>

#include "capdual/cap_chart.hpp"
#include "capdual/capillary_body.hpp"

namespace capdual {

struct ProblemSpec {
  GridPtr grid;
  ExponentPair pq;
  ScalarField f;

  /// Throws InvalidExponents / InvalidArgument on p <= q or non-positive f.
  void validate() const;
  const CapSpec& cap() const { return grid->spec(); }
  ProblemSpec with_density(ScalarField density) const;
};

struct ResidualVector {
  std::vector<double> values;      // +inf at nodes where det B <= 0
  std::vector<int> nonconvex_nodes;

  double max_norm() const;
  double interior_max_norm(const PolarGrid& grid) const;
  double boundary_max_norm(const PolarGrid& grid) const;
};

struct SparseJacobian {
  Eigen::SparseMatrix<double> matrix;
};

/// Frame matrix B = Hess v + grad v (x) grad v + sigma at `node`.
FrameSymMatrix log_variable_matrix(std::span<const double> v, const PolarGrid& grid, std::size_t node);
FrameSymMatrix log_variable_matrix(const RingSplitField& v, const PolarGrid& grid, std::size_t node);

struct LogMargin {
  double min_eigenvalue = 0.0;  // smallest eigenvalue of B over interior nodes
  double max_eigenvalue = 0.0;
  double min_a_eigenvalue = 0.0;  // e^v * lambda_min(B), the convexity margin of h = e^v
};

LogMargin log_variable_margin(std::span<const double> v, const PolarGrid& grid);
LogMargin log_variable_margin(const RingSplitField& v, const PolarGrid& grid);

ResidualVector residual(std::span<const double> v, const ProblemSpec& prob);
ResidualVector residual(const RingSplitField& v, const ProblemSpec& prob);

/// Exact derivative of residual() with respect to the nodal values of v.
/// Throws NonConvex if B is not positive definite on some interior node.
SparseJacobian jacobian(std::span<const double> v, const ProblemSpec& prob);
SparseJacobian jacobian(const RingSplitField& v, const ProblemSpec& prob);

/// Residual written directly in h: log det A - log(f h^{p-1} (h^2+|grad h|^2)^{(n+1-q)/2})
/// on interior rows, (d_r h - cot theta h)/h on the boundary.  Coded
/// independently of residual() for the chain-rule consistency check.
std::vector<double> h_form_residual(std::span<const double> h, const ProblemSpec& prob);

/// f_0 = l^{1-p} (l^2 + |grad l|^2)^{(q-n-1)/2}, in closed form; h = l solves
/// the continuous problem with this density.
ScalarField homotopy_start_density(const PolarGrid& grid, const ExponentPair& pq);

}  // namespace capdual
