#include "capdual/ma_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "capdual/errors.hpp"

namespace capdual {

void ProblemSpec::validate() const {
  if (!grid) throw InvalidArgument("problem has no grid");
  pq.validate();
  if (f.size() != grid->size()) throw InvalidArgument("density size does not match the grid");
  for (double v : f) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("density f must be positive and finite at every node");
  }
}

ProblemSpec ProblemSpec::with_density(ScalarField density) const { return {grid, pq, std::move(density)}; }

double ResidualVector::max_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double ResidualVector::interior_max_norm(const PolarGrid& grid) const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!grid.is_boundary(k)) m = std::max(m, std::abs(values[k]));
  }
  return m;
}

double ResidualVector::boundary_max_norm(const PolarGrid& grid) const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (grid.is_boundary(k)) m = std::max(m, std::abs(values[k]));
  }
  return m;
}

FrameSymMatrix log_variable_matrix(std::span<const double> v, const PolarGrid& grid, std::size_t node) {
  return log_variable_matrix(RingSplitField(grid.nphi(), v), grid, node);
}

FrameSymMatrix log_variable_matrix(const RingSplitField& v, const PolarGrid& grid, std::size_t node) {
  const auto g = grad_at(v, grid, node);
  auto b = hessian_at(v, grid, node);
  b.rr += g.r * g.r + 1.0;
  b.rphi += g.r * g.phi;
  b.phiphi += g.phi * g.phi + 1.0;
  return b;
}

LogMargin log_variable_margin(std::span<const double> v, const PolarGrid& grid) {
  return log_variable_margin(RingSplitField(grid.nphi(), v), grid);
}

LogMargin log_variable_margin(const RingSplitField& v, const PolarGrid& grid) {
  const int n = grid.spec().n();
  LogMargin m{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.is_boundary(k)) continue;
    const auto b = log_variable_matrix(v, grid, k);
    const double lo = b.min_eigenvalue(n);
    m.min_eigenvalue = std::min(m.min_eigenvalue, lo);
    m.max_eigenvalue = std::max(m.max_eigenvalue, b.max_eigenvalue(n));
    m.min_a_eigenvalue = std::min(m.min_a_eigenvalue, std::exp(v[k]) * lo);
  }
  return m;
}

ResidualVector residual(std::span<const double> v, const ProblemSpec& prob) {
  return residual(RingSplitField(prob.grid->nphi(), v), prob);
}

ResidualVector residual(const RingSplitField& v, const ProblemSpec& prob) {
  const auto& grid = *prob.grid;
  const auto& cap = grid.spec();
  const int n = cap.n();
  const double pq_gap = prob.pq.p - prob.pq.q;
  const double grad_exp = 0.5 * (n + 1.0 - prob.pq.q);

  ResidualVector out;
  out.values.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.is_boundary(k)) {
      out.values[k] = grid.stencils().grad_r.apply(v, k) - cap.cot_theta();
      continue;
    }
    const auto g = grad_at(v, grid, k);
    const auto b = log_variable_matrix(v, grid, k);
    const double det = b.determinant(n);
    const bool definite = n == 1 ? det > 0.0 : (det > 0.0 && b.rr > 0.0);
    if (!definite || !std::isfinite(det)) {
      out.values[k] = std::numeric_limits<double>::infinity();
      out.nonconvex_nodes.push_back(static_cast<int>(k));
      continue;
    }
    out.values[k] =
        std::log(det) - std::log(prob.f[k]) - pq_gap * v[k] - grad_exp * std::log1p(g.norm_squared());
  }
  return out;
}

SparseJacobian jacobian(std::span<const double> v, const ProblemSpec& prob) {
  return jacobian(RingSplitField(prob.grid->nphi(), v), prob);
}

SparseJacobian jacobian(const RingSplitField& v, const ProblemSpec& prob) {
  const auto& grid = *prob.grid;
  const auto& st = grid.stencils();
  const int n = grid.spec().n();
  const double pq_gap = prob.pq.p - prob.pq.q;
  const double grad_coef = n + 1.0 - prob.pq.q;
  const auto size = static_cast<Eigen::Index>(grid.size());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(grid.size() * 40);
  auto add_row = [&](std::size_t node, const StencilTable& table, double coef) {
    const auto row = table.row(node);
    for (std::size_t t = 0; t < row.cols.size(); ++t) {
      triplets.emplace_back(static_cast<Eigen::Index>(node), row.cols[t], coef * row.weights[t]);
    }
  };

  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.is_boundary(k)) {
      add_row(k, st.grad_r, 1.0);
      continue;
    }
    const auto g = grad_at(v, grid, k);
    const auto b = log_variable_matrix(v, grid, k);
    const double det = b.determinant(n);
    const bool definite = n == 1 ? det > 0.0 : (det > 0.0 && b.rr > 0.0);
    if (!definite) {
      throw NonConvex("jacobian: log-variable matrix B is not positive definite at node " + std::to_string(k));
    }
    const double damp = grad_coef / (1.0 + g.norm_squared());
    if (n == 1) {
      const double c11 = 1.0 / det;
      add_row(k, st.hess_rr, c11);
      add_row(k, st.grad_r, 2.0 * g.r * c11 - damp * g.r);
    } else {
      // d log det B = (B22 dB11 - 2 B12 dB12 + B11 dB22) / det B
      const double c11 = b.phiphi / det;
      const double c12 = -2.0 * b.rphi / det;
      const double c22 = b.rr / det;
      add_row(k, st.hess_rr, c11);
      add_row(k, st.hess_rphi, c12);
      add_row(k, st.hess_phiphi, c22);
      add_row(k, st.grad_r, 2.0 * g.r * c11 + g.phi * c12 - damp * g.r);
      add_row(k, st.grad_phi, g.r * c12 + 2.0 * g.phi * c22 - damp * g.phi);
    }
    triplets.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), -pq_gap);
  }

  SparseJacobian out;
  out.matrix.resize(size, size);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  return out;
}

std::vector<double> h_form_residual(std::span<const double> h, const ProblemSpec& prob) {
  const auto& grid = *prob.grid;
  const auto& cap = grid.spec();
  const int n = cap.n();
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double hk = h[k];
    if (grid.is_boundary(k)) {
      out[k] = (grid.stencils().grad_r.apply(h, k) - cap.cot_theta() * hk) / hk;
      continue;
    }
    auto a = hessian_at(h, grid, k);
    a.rr += hk;
    a.phiphi += hk;
    const auto g = grad_at(h, grid, k);
    const double rhs =
        prob.f[k] * std::pow(hk, prob.pq.p - 1.0) * std::pow(hk * hk + g.norm_squared(), 0.5 * (n + 1.0 - prob.pq.q));
    const double det = a.determinant(n);
    out[k] = det > 0.0 ? std::log(det) - std::log(rhs) : std::numeric_limits<double>::infinity();
  }
  return out;
}

ScalarField homotopy_start_density(const PolarGrid& grid, const ExponentPair& pq) {
  const auto& cap = grid.spec();
  const auto l = l_field(grid);
  const double c = cap.cos_theta();
  const double e = 0.5 * (pq.q - cap.n() - 1.0);
  ScalarField f0(grid.size());
  for (std::size_t k = 0; k < f0.size(); ++k) {
    const double sr = grid.is_boundary(k) ? cap.sin_theta() : std::sin(grid.node_r(k));
    const double grad_sq = c * c * sr * sr;
    f0[k] = std::pow(l[k], 1.0 - pq.p) * std::pow(l[k] * l[k] + grad_sq, e);
  }
  return f0;
}

}  // namespace capdual
