#include "capdual/capillary_body.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "capdual/errors.hpp"

namespace capdual {

void ExponentPair::validate() const {
  if (!(p > q)) {
    throw InvalidExponents("exponents must satisfy p > q (got p = " + std::to_string(p) + ", q = " + std::to_string(q) +
                           ")");
  }
}

SupportField::SupportField(GridPtr grid, ScalarField h) : grid_(std::move(grid)), h_(std::move(h)) {
  if (!grid_) throw InvalidArgument("support field needs a grid");
  if (h_.size() != grid_->size()) throw InvalidArgument("support field size does not match the grid");
  for (double v : h_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("support function must be positive and finite");
  }
}

SupportField SupportField::scaled(double c) const {
  ScalarField out = h_;
  for (auto& v : out) v *= c;
  return {grid_, std::move(out)};
}

std::vector<FrameSymMatrix> second_fundamental_form(const SupportField& h) {
  auto a = hessian(h.values(), h.grid());
  const auto& v = h.values();
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k].rr += v[k];
    a[k].phiphi += v[k];
  }
  return a;
}

double convexity_margin(const SupportField& h) {
  const int n = h.spec().n();
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& a : second_fundamental_form(h)) margin = std::min(margin, a.min_eigenvalue(n));
  return margin;
}

ScalarField capillary_support(const SupportField& h) {
  const auto l = l_field(h.grid());
  ScalarField u(l.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = h.values()[k] / l[k];
  return u;
}

namespace {

void require_convex(const SupportField& h, const char* what) {
  const double margin = convexity_margin(h);
  if (!(margin > 0.0)) {
    throw NonConvex(std::string(what) + ": second fundamental form is not positive definite (margin " +
                    std::to_string(margin) + ")");
  }
}

Point3 sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Point3 cross(const Point3& a, const Point3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

ScalarField gauss_curvature(const SupportField& h) {
  require_convex(h, "gauss_curvature");
  const int n = h.spec().n();
  const auto a = second_fundamental_form(h);
  ScalarField k(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) k[i] = 1.0 / a[i].determinant(n);
  return k;
}

ScalarField measure_density(const SupportField& h, const ExponentPair& pq) {
  const auto& grid = h.grid();
  const int n = grid.spec().n();
  const auto l = l_field(grid);
  const auto a = second_fundamental_form(h);
  const auto g = grad(h.values(), grid);
  const double e_grad = 0.5 * (pq.q - n - 1.0);
  ScalarField out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double hk = h.values()[k];
    out[k] = l[k] * std::pow(hk, 1.0 - pq.p) * std::pow(hk * hk + g[k].norm_squared(), e_grad) * a[k].determinant(n);
  }
  return out;
}

BodyMesh embed(const SupportField& h) {
  const auto& grid = h.grid();
  if (grid.spec().n() != 2) throw InvalidArgument("embed supports n = 2 only");
  require_convex(h, "embed");

  const auto g = grad(h.values(), grid);
  BodyMesh mesh;
  mesh.vertices.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid.node_r(k);
    const double phi = grid.node_phi(k);
    const double sr = std::sin(r), cr = std::cos(r), sp = std::sin(phi), cp = std::cos(phi);
    const Point3 z{sr * cp, sr * sp, cr};
    const Point3 dz{cr * cp, cr * sp, -sr};
    const Point3 ephi{-sp, cp, 0.0};
    const double hk = h.values()[k];
    for (int c = 0; c < 3; ++c) {
      mesh.vertices[k][static_cast<std::size_t>(c)] = g[k].r * dz[static_cast<std::size_t>(c)] +
                                                      g[k].phi * ephi[static_cast<std::size_t>(c)] +
                                                      hk * z[static_cast<std::size_t>(c)];
    }
  }

  const int nr = grid.nr(), nphi = grid.nphi();
  auto id = [&](int i, int j) { return static_cast<int>(grid.index(i, ((j % nphi) + nphi) % nphi)); };
  for (int j = 1; j + 1 < nphi; ++j) mesh.faces.push_back({id(0, 0), id(0, j), id(0, j + 1)});
  for (int i = 0; i + 1 < nr; ++i) {
    for (int j = 0; j < nphi; ++j) {
      mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  for (int j = 0; j < nphi; ++j) mesh.boundary_loop.push_back(id(nr - 1, j));
  return mesh;
}

std::vector<double> contact_angle(const BodyMesh& mesh) {
  if (mesh.boundary_loop.size() < 3) throw DegenerateBoundary("boundary loop has fewer than 3 vertices");
  std::vector<Point3> normal(mesh.vertices.size(), Point3{0.0, 0.0, 0.0});
  for (const auto& f : mesh.faces) {
    const auto& a = mesh.vertices[static_cast<std::size_t>(f[0])];
    const auto& b = mesh.vertices[static_cast<std::size_t>(f[1])];
    const auto& c = mesh.vertices[static_cast<std::size_t>(f[2])];
    const Point3 nf = cross(sub(b, a), sub(c, a));  // area weighted
    for (int v : f) {
      for (int d = 0; d < 3; ++d) normal[static_cast<std::size_t>(v)][static_cast<std::size_t>(d)] += nf[static_cast<std::size_t>(d)];
    }
  }
  std::vector<double> angles;
  angles.reserve(mesh.boundary_loop.size());
  for (int v : mesh.boundary_loop) {
    const auto& nv = normal[static_cast<std::size_t>(v)];
    const double len = std::sqrt(nv[0] * nv[0] + nv[1] * nv[1] + nv[2] * nv[2]);
    if (!(len > 0.0)) throw DegenerateBoundary("boundary vertex without incident faces");
    // cos(pi - theta) = <nu, e> with e = -E_3, i.e. theta = acos(nu_3).
    angles.push_back(std::acos(std::clamp(nv[2] / len, -1.0, 1.0)));
  }
  return angles;
}

double mesh_tolerance(const PolarGrid& grid) {
  const double d = grid.spacing();
  return 10.0 * d * d;
}

void write_obj(const BodyMesh& mesh, std::ostream& out) {
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << buf;
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!mesh.boundary_loop.empty()) {
    out << 'l';
    for (int v : mesh.boundary_loop) out << ' ' << v + 1;
    out << ' ' << mesh.boundary_loop.front() + 1 << '\n';
  }
}

BoundaryIdentityReport boundary_identity_check(const SupportField& h, double threshold) {
  const auto& grid = h.grid();
  const auto& spec = grid.spec();
  BoundaryIdentityReport rep;
  double hmax = 0.0;
  for (double v : h.values()) hmax = std::max(hmax, v);
  rep.threshold = threshold > 0.0 ? threshold : mesh_tolerance(grid) * std::max(1.0, hmax);

  const auto u = capillary_support(h);
  const int ring = grid.nr() - 1;
  for (int j = 0; j < grid.nphi(); ++j) {
    const std::size_t node = grid.index(ring, j);
    const double hv = h.values()[node];
    const double robin = grid.stencils().grad_r.apply(h.values(), node) - spec.cot_theta() * hv;
    rep.max_robin_residual = std::max(rep.max_robin_residual, std::abs(robin));
    if (spec.n() == 2) {
      const auto hh = hessian_at(h.values(), grid, node);
      rep.max_h_kn = std::max(rep.max_h_kn, std::abs(hh.rphi));
      const auto hu = hessian_at(u, grid, node);
      const auto gu = grad_at(u, grid, node);
      rep.max_u_identity = std::max(rep.max_u_identity, std::abs(hu.rphi + spec.cot_theta() * gu.phi));
    }
  }
  rep.flagged = rep.max_h_kn > rep.threshold || rep.max_u_identity > rep.threshold ||
                rep.max_robin_residual > rep.threshold;
  return rep;
}

}  // namespace capdual
