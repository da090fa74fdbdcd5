#pragma once

// Geodesic polar chart of the spherical cap C_theta and the discrete
// differential operators built on it.
//
// Nodes sit on rings r_i = (i + 1/2) dr, i = 0..nr-1, with dr chosen so that
// the last ring lies exactly on the boundary r = theta.  There is no node at
// the pole; stencils that reach r < 0 read the node on the opposite side of
// the pole, (r, phi) ~ (-r, phi + pi).  Vectors and symmetric matrices are
// expressed in the orthonormal frame {d_r, (1/sin r) d_phi}.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace capdual {

using ScalarField = std::vector<double>;

class CapSpec {
 public:
  /// theta in (0, pi/2), n in {1, 2}.
  explicit CapSpec(double theta, int n = 2);

  double theta() const { return theta_; }
  int n() const { return n_; }
  double cos_theta() const { return cos_theta_; }
  double sin_theta() const { return sin_theta_; }
  double cot_theta() const { return cot_theta_; }

  /// Area (n = 2) or length (n = 1) of the cap.
  double area() const;

 private:
  double theta_;
  int n_;
  double cos_theta_;
  double sin_theta_;
  double cot_theta_;
};

struct FrameVector {
  double r = 0.0;
  double phi = 0.0;

  double norm_squared() const { return r * r + phi * phi; }
};

/// Symmetric 2x2 matrix; only the upper triangle is stored so the matrix is
/// symmetric by construction.  For n = 1 only `rr` is meaningful.
struct FrameSymMatrix {
  double rr = 0.0;
  double rphi = 0.0;
  double phiphi = 0.0;

  double operator()(int i, int j) const {
    if (i == 0 && j == 0) return rr;
    if (i == 1 && j == 1) return phiphi;
    return rphi;
  }

  double trace(int n) const { return n == 1 ? rr : rr + phiphi; }
  double determinant(int n) const { return n == 1 ? rr : rr * phiphi - rphi * rphi; }
  /// Closed-form eigenvalues (trace / discriminant).
  double min_eigenvalue(int n) const;
  double max_eigenvalue(int n) const;
};

/// Nodal field held as a per-ring base plus a per-node deviation.  Angular
/// differences then only see the rounding of the deviation, which near the
/// pole is much smaller than the rounding of the full value; the pole-ring
/// stencils carry weights of order 1/(r^2 dphi^2).
class RingSplitField {
 public:
  RingSplitField() = default;
  /// Base is the ring mean of `values`.
  RingSplitField(int nphi, std::span<const double> values);
  RingSplitField(int nphi, std::vector<double> ring_base, ScalarField deviation);

  double operator[](std::size_t node) const { return base_[node / nphi_] + dev_[node]; }
  std::size_t size() const { return dev_.size(); }
  int nphi() const { return static_cast<int>(nphi_); }
  /// base[ring(a)] - base[ring(b)] + dev[a] - dev[b]
  double difference(std::size_t a, std::size_t b) const {
    return (base_[a / nphi_] - base_[b / nphi_]) + (dev_[a] - dev_[b]);
  }
  ScalarField values() const;
  const std::vector<double>& ring_base() const { return base_; }
  const ScalarField& deviation() const { return dev_; }

  /// this += alpha * delta, then moves each ring mean of the deviation into the base.
  void axpy(double alpha, std::span<const double> delta);

 private:
  void rebalance();

  std::size_t nphi_ = 1;
  std::vector<double> base_;
  ScalarField dev_;
};

/// Linear stencils stored row-wise (CSR).  Every row sums to zero, and
/// apply() evaluates sum_k w_k (v_k - v_node) so large weights near the pole
/// do not amplify the rounding of the nodal values themselves.
class StencilTable {
 public:
  struct Row {
    std::span<const int> cols;
    std::span<const double> weights;
  };

  StencilTable() = default;
  explicit StencilTable(std::size_t rows);

  void set_row(std::size_t node, std::vector<std::pair<int, double>> terms);
  void finalize();

  Row row(std::size_t node) const;
  double apply(std::span<const double> values, std::size_t node) const;
  double apply(const RingSplitField& values, std::size_t node) const;
  std::size_t rows() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

 private:
  std::vector<std::vector<std::pair<int, double>>> pending_;
  std::vector<std::size_t> offsets_;
  std::vector<int> cols_;
  std::vector<double> weights_;
};

/// Frame-component stencils: gradient (g_r, g_phi) and covariant Hessian
/// (H_rr, H_rphi, H_phiphi) with respect to sigma = dr^2 + sin^2 r dphi^2.
struct FrameStencils {
  StencilTable grad_r;
  StencilTable grad_phi;
  StencilTable hess_rr;
  StencilTable hess_rphi;
  StencilTable hess_phiphi;
};

class PolarGrid {
 public:
  /// n = 2 requires nphi even and >= 4; n = 1 requires nphi == 1.  nr >= 4.
  static std::shared_ptr<const PolarGrid> make(const CapSpec& spec, int nr, int nphi);

  const CapSpec& spec() const { return spec_; }
  int nr() const { return nr_; }
  int nphi() const { return nphi_; }
  std::size_t size() const { return static_cast<std::size_t>(nr_) * static_cast<std::size_t>(nphi_); }
  std::size_t index(int ring, int col) const {
    return static_cast<std::size_t>(ring) * static_cast<std::size_t>(nphi_) + static_cast<std::size_t>(col);
  }
  int ring_of(std::size_t node) const { return static_cast<int>(node / static_cast<std::size_t>(nphi_)); }
  int col_of(std::size_t node) const { return static_cast<int>(node % static_cast<std::size_t>(nphi_)); }
  bool is_boundary(std::size_t node) const { return ring_of(node) == nr_ - 1; }

  double dr() const { return dr_; }
  double dphi() const { return dphi_; }
  double r(int ring) const { return r_[static_cast<std::size_t>(ring)]; }
  double phi(int col) const { return phi_[static_cast<std::size_t>(col)]; }
  const std::vector<double>& r_nodes() const { return r_; }
  const std::vector<double>& phi_nodes() const { return phi_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Column paired with `col` across the pole.
  int pole_partner(int col) const;

  /// Largest geodesic spacing between neighbouring nodes.
  double spacing() const;

  const FrameStencils& stencils() const { return stencils_; }

  // r, phi of every node; handy for closed-form fields.
  double node_r(std::size_t node) const { return r(ring_of(node)); }
  double node_phi(std::size_t node) const { return phi(col_of(node)); }

 private:
  PolarGrid(const CapSpec& spec, int nr, int nphi);
  void build_weights();
  void build_stencils();

  CapSpec spec_;
  int nr_;
  int nphi_;
  double dr_;
  double dphi_;
  std::vector<double> r_;
  std::vector<double> phi_;
  std::vector<double> weights_;
  FrameStencils stencils_;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

/// l = sin^2 theta + cos theta <xi, e>, which in the chart is 1 - cos theta cos r.
ScalarField l_field(const PolarGrid& grid);

std::vector<FrameVector> grad(std::span<const double> field, const PolarGrid& grid);
std::vector<FrameSymMatrix> hessian(std::span<const double> field, const PolarGrid& grid);

FrameVector grad_at(std::span<const double> field, const PolarGrid& grid, std::size_t node);
FrameSymMatrix hessian_at(std::span<const double> field, const PolarGrid& grid, std::size_t node);
FrameVector grad_at(const RingSplitField& field, const PolarGrid& grid, std::size_t node);
FrameSymMatrix hessian_at(const RingSplitField& field, const PolarGrid& grid, std::size_t node);

/// d_r at r = theta, one value per boundary column.
std::vector<double> normal_derivative(std::span<const double> field, const PolarGrid& grid);

double integrate(std::span<const double> field, const PolarGrid& grid);

}  // namespace capdual
