#pragma once

// Geometry of the capillary hypersurface described by a support function h
// on the cap: second fundamental form, curvature, the (p,q) dual curvature
// measure density and the embedding X = grad h + h * z.

#include <array>
#include <iosfwd>
#include <vector>

#include "capdual/cap_chart.hpp"

namespace capdual {

struct ExponentPair {
  double p = 0.0;
  double q = 0.0;

  /// Throws InvalidExponents unless p > q.
  void validate() const;
};

/// Positive support function sampled on a grid.
class SupportField {
 public:
  SupportField(GridPtr grid, ScalarField h);

  const PolarGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const CapSpec& spec() const { return grid_->spec(); }
  const ScalarField& values() const { return h_; }

  SupportField scaled(double c) const;

 private:
  GridPtr grid_;
  ScalarField h_;
};

using Point3 = std::array<double, 3>;

struct BodyMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<int> boundary_loop;
};

std::vector<FrameSymMatrix> second_fundamental_form(const SupportField& h);

/// Smallest eigenvalue of A over all nodes.
double convexity_margin(const SupportField& h);

ScalarField capillary_support(const SupportField& h);

/// K = 1 / det A.  Throws NonConvex if the convexity margin is not positive.
ScalarField gauss_curvature(const SupportField& h);

/// l h^{1-p} (h^2 + |grad h|^2)^{(q-n-1)/2} det A, the density against d sigma.
ScalarField measure_density(const SupportField& h, const ExponentPair& pq);

/// Vertex k is X at grid node k.  Quads are split along the (i,j)-(i+1,j+1)
/// diagonal; the innermost ring is closed by a fan from its first vertex.
/// Only n = 2.  Throws NonConvex if the convexity margin is not positive.
BodyMesh embed(const SupportField& h);

/// Angle between the outward normal along the boundary loop and the
/// horizontal plane, one value per boundary vertex.
std::vector<double> contact_angle(const BodyMesh& mesh);

/// Half-space tolerance for meshes built on `grid`: 10 * spacing^2.
double mesh_tolerance(const PolarGrid& grid);

void write_obj(const BodyMesh& mesh, std::ostream& out);

struct BoundaryIdentityReport {
  double max_h_kn = 0.0;          // |Hess h(e_phi, mu)| on the boundary
  double max_u_identity = 0.0;    // |u_kn + cot theta u_k|
  double max_robin_residual = 0.0;  // |d_mu h - cot theta h|
  double threshold = 0.0;
  bool flagged = false;
};

/// Checks h_kn = 0 and u_kn = -cot theta u_k along the boundary.  Flags the
/// report when any quantity exceeds `threshold`; a non-positive threshold
/// selects 10 * spacing^2 * max(1, max h).
BoundaryIdentityReport boundary_identity_check(const SupportField& h, double threshold = 0.0);

}  // namespace capdual
