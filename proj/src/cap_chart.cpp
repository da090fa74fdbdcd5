#include "capdual/cap_chart.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "capdual/errors.hpp"

namespace capdual {

CapSpec::CapSpec(double theta, int n) : theta_(theta), n_(n) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) {
    throw InvalidArgument("contact angle theta must lie in (0, pi/2), got " + std::to_string(theta));
  }
  if (n != 1 && n != 2) {
    throw InvalidArgument("cap dimension n must be 1 or 2, got " + std::to_string(n));
  }
  cos_theta_ = std::cos(theta);
  sin_theta_ = std::sin(theta);
  cot_theta_ = cos_theta_ / sin_theta_;
}

double CapSpec::area() const {
  return n_ == 2 ? 2.0 * std::numbers::pi * (1.0 - cos_theta_) : 2.0 * theta_;
}

double FrameSymMatrix::min_eigenvalue(int n) const {
  if (n == 1) return rr;
  const double half_trace = 0.5 * (rr + phiphi);
  const double half_diff = 0.5 * (rr - phiphi);
  return half_trace - std::hypot(half_diff, rphi);
}

double FrameSymMatrix::max_eigenvalue(int n) const {
  if (n == 1) return rr;
  const double half_trace = 0.5 * (rr + phiphi);
  const double half_diff = 0.5 * (rr - phiphi);
  return half_trace + std::hypot(half_diff, rphi);
}

// ---------------------------------------------------------------------------
// RingSplitField

RingSplitField::RingSplitField(int nphi, std::span<const double> values)
    : nphi_(static_cast<std::size_t>(nphi)), dev_(values.begin(), values.end()) {
  if (nphi < 1 || dev_.size() % nphi_ != 0) throw InvalidArgument("field size is not a multiple of the ring size");
  base_.assign(dev_.size() / nphi_, 0.0);
  rebalance();
}

RingSplitField::RingSplitField(int nphi, std::vector<double> ring_base, ScalarField deviation)
    : nphi_(static_cast<std::size_t>(nphi)), base_(std::move(ring_base)), dev_(std::move(deviation)) {
  if (nphi < 1 || dev_.size() != base_.size() * nphi_) throw InvalidArgument("ring base and deviation sizes disagree");
}

ScalarField RingSplitField::values() const {
  ScalarField out(dev_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*this)[k];
  return out;
}

void RingSplitField::axpy(double alpha, std::span<const double> delta) {
  for (std::size_t k = 0; k < dev_.size(); ++k) dev_[k] += alpha * delta[k];
  rebalance();
}

void RingSplitField::rebalance() {
  for (std::size_t i = 0; i < base_.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < nphi_; ++j) sum += dev_[i * nphi_ + j];
    const double mean = sum / static_cast<double>(nphi_);
    base_[i] += mean;
    for (std::size_t j = 0; j < nphi_; ++j) dev_[i * nphi_ + j] -= mean;
  }
}

// ---------------------------------------------------------------------------
// StencilTable

StencilTable::StencilTable(std::size_t rows) : pending_(rows) {}

void StencilTable::set_row(std::size_t node, std::vector<std::pair<int, double>> terms) {
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  merged.reserve(terms.size() + 1);
  for (const auto& [col, w] : terms) {
    if (!merged.empty() && merged.back().first == col) {
      merged.back().second += w;
    } else {
      merged.emplace_back(col, w);
    }
  }
  // Zero row sum: the centre weight is minus the sum of the others.
  const int centre = static_cast<int>(node);
  double off_sum = 0.0;
  bool has_centre = false;
  for (const auto& [col, w] : merged) {
    if (col == centre) {
      has_centre = true;
    } else {
      off_sum += w;
    }
  }
  if (!has_centre) {
    merged.emplace_back(centre, 0.0);
    std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  for (auto& [col, w] : merged) {
    if (col == centre) w = -off_sum;
  }
  pending_[node] = std::move(merged);
}

void StencilTable::finalize() {
  offsets_.assign(pending_.size() + 1, 0);
  for (std::size_t i = 0; i < pending_.size(); ++i) offsets_[i + 1] = offsets_[i] + pending_[i].size();
  cols_.resize(offsets_.back());
  weights_.resize(offsets_.back());
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    std::size_t k = offsets_[i];
    for (const auto& [col, w] : pending_[i]) {
      cols_[k] = col;
      weights_[k] = w;
      ++k;
    }
  }
  pending_.clear();
  pending_.shrink_to_fit();
}

StencilTable::Row StencilTable::row(std::size_t node) const {
  const std::size_t begin = offsets_[node];
  const std::size_t count = offsets_[node + 1] - begin;
  return {std::span<const int>(cols_).subspan(begin, count), std::span<const double>(weights_).subspan(begin, count)};
}

double StencilTable::apply(std::span<const double> values, std::size_t node) const {
  const double centre = values[node];
  double acc = 0.0;
  for (std::size_t k = offsets_[node]; k < offsets_[node + 1]; ++k) {
    acc += weights_[k] * (values[static_cast<std::size_t>(cols_[k])] - centre);
  }
  return acc;
}

double StencilTable::apply(const RingSplitField& values, std::size_t node) const {
  double acc = 0.0;
  for (std::size_t k = offsets_[node]; k < offsets_[node + 1]; ++k) {
    acc += weights_[k] * values.difference(static_cast<std::size_t>(cols_[k]), node);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// PolarGrid

std::shared_ptr<const PolarGrid> PolarGrid::make(const CapSpec& spec, int nr, int nphi) {
  if (nr < 4) throw InvalidArgument("polar grid needs at least 4 rings");
  if (spec.n() == 2 && (nphi < 4 || nphi % 2 != 0)) {
    throw InvalidArgument("n = 2 grids need an even angular count >= 4 (pole closure pairs phi with phi + pi)");
  }
  if (spec.n() == 1 && nphi != 1) throw InvalidArgument("n = 1 grids have a single angular column");
  return std::shared_ptr<const PolarGrid>(new PolarGrid(spec, nr, nphi));
}

PolarGrid::PolarGrid(const CapSpec& spec, int nr, int nphi)
    : spec_(spec), nr_(nr), nphi_(nphi), dr_(spec.theta() / (nr - 0.5)), dphi_(2.0 * std::numbers::pi / nphi) {
  r_.resize(static_cast<std::size_t>(nr));
  for (int i = 0; i < nr; ++i) r_[static_cast<std::size_t>(i)] = (i + 0.5) * dr_;
  r_.back() = spec.theta();
  phi_.resize(static_cast<std::size_t>(nphi));
  for (int j = 0; j < nphi; ++j) phi_[static_cast<std::size_t>(j)] = j * dphi_;
  build_weights();
  build_stencils();
}

int PolarGrid::pole_partner(int col) const {
  if (spec_.n() == 1) return col;
  return (col + nphi_ / 2) % nphi_;
}

double PolarGrid::spacing() const {
  if (spec_.n() == 1) return dr_;
  return std::max(dr_, spec_.sin_theta() * dphi_);
}

void PolarGrid::build_weights() {
  weights_.resize(size());
  const int n = spec_.n();
  for (int i = 0; i < nr_; ++i) {
    const bool boundary = (i == nr_ - 1);
    const double lo = r(i) - 0.5 * dr_;
    const double hi = boundary ? spec_.theta() : r(i) + 0.5 * dr_;
    double w = 0.0;
    if (n == 2) {
      w = dphi_ * (std::cos(std::max(lo, 0.0)) - std::cos(hi));
    } else {
      w = 2.0 * (hi - lo);
    }
    for (int j = 0; j < nphi_; ++j) weights_[index(i, j)] = w;
  }
}

namespace {

struct RadialTerm {
  int ring;
  double weight;
};

// d/dr: fourth order in the interior (the cot r / r factors near the pole
// would otherwise turn an O(dr^2) error into O(dr)), centred second order on
// the ring next to the boundary, one-sided second order on the boundary.
std::vector<RadialTerm> radial_first(int i, int nr, double dr) {
  if (i <= nr - 3) {
    const double a = 1.0 / (12.0 * dr);
    return {{i - 2, a}, {i - 1, -8.0 * a}, {i + 1, 8.0 * a}, {i + 2, -a}};
  }
  if (i == nr - 2) {
    const double a = 0.5 / dr;
    return {{i - 1, -a}, {i + 1, a}};
  }
  const double a = 0.5 / dr;
  return {{i, 3.0 * a}, {i - 1, -4.0 * a}, {i - 2, a}};
}

std::vector<RadialTerm> radial_second(int i, int nr, double dr) {
  const double a = 1.0 / (dr * dr);
  if (i <= nr - 2) return {{i - 1, a}, {i, -2.0 * a}, {i + 1, a}};
  return {{i, 2.0 * a}, {i - 1, -5.0 * a}, {i - 2, 4.0 * a}, {i - 3, -a}};
}

}  // namespace

void PolarGrid::build_stencils() {
  const std::size_t count = size();
  const int n = spec_.n();
  FrameStencils st{StencilTable(count), StencilTable(count), StencilTable(count), StencilTable(count),
                   StencilTable(count)};

  // Angular stencils are normalised to be exact on the first harmonic; near
  // the pole the 1/sin^2 r weights would amplify their O(dphi^2) error.
  const double a_phi = n == 2 ? 1.0 / (2.0 * std::sin(dphi_)) : 0.0;
  const double a_phiphi = n == 2 ? 1.0 / (2.0 - 2.0 * std::cos(dphi_)) : 0.0;

  auto resolve = [&](int ring, int col) -> int {
    if (ring < 0) {
      ring = -ring - 1;
      col = pole_partner(col);
    }
    return static_cast<int>(index(ring, col));
  };
  auto wrap = [&](int col) { return ((col % nphi_) + nphi_) % nphi_; };

  // d_phi at (ring, col), where ring may be a ghost ring below the pole.
  auto d_phi_terms = [&](int ring, int col, double scale, std::vector<std::pair<int, double>>& out) {
    if (ring < 0) {
      ring = -ring - 1;
      col = pole_partner(col);
    }
    out.emplace_back(static_cast<int>(index(ring, wrap(col + 1))), scale * a_phi);
    out.emplace_back(static_cast<int>(index(ring, wrap(col - 1))), -scale * a_phi);
  };

  for (int i = 0; i < nr_; ++i) {
    const double ri = r(i);
    const double s = std::sin(ri);
    const double cot = std::cos(ri) / s;
    const auto d1 = radial_first(i, nr_, dr_);
    const auto d2 = radial_second(i, nr_, dr_);
    for (int j = 0; j < nphi_; ++j) {
      const std::size_t node = index(i, j);
      std::vector<std::pair<int, double>> g_r, h_rr;
      for (const auto& t : d1) g_r.emplace_back(resolve(t.ring, j), t.weight);
      for (const auto& t : d2) h_rr.emplace_back(resolve(t.ring, j), t.weight);

      std::vector<std::pair<int, double>> g_phi, h_rphi, h_phiphi;
      if (n == 2) {
        d_phi_terms(i, j, 1.0 / s, g_phi);

        // (d_r d_phi - cot r d_phi) / sin r
        for (const auto& t : d1) d_phi_terms(t.ring, j, t.weight / s, h_rphi);
        d_phi_terms(i, j, -cot / s, h_rphi);

        // d_phiphi / sin^2 r + cot r d_r
        const double b = a_phiphi / (s * s);
        h_phiphi.emplace_back(static_cast<int>(index(i, wrap(j + 1))), b);
        h_phiphi.emplace_back(static_cast<int>(index(i, wrap(j - 1))), b);
        for (const auto& t : d1) h_phiphi.emplace_back(resolve(t.ring, j), cot * t.weight);
      }
      st.grad_r.set_row(node, std::move(g_r));
      st.hess_rr.set_row(node, std::move(h_rr));
      st.grad_phi.set_row(node, std::move(g_phi));
      st.hess_rphi.set_row(node, std::move(h_rphi));
      st.hess_phiphi.set_row(node, std::move(h_phiphi));
    }
  }
  st.grad_r.finalize();
  st.grad_phi.finalize();
  st.hess_rr.finalize();
  st.hess_rphi.finalize();
  st.hess_phiphi.finalize();
  stencils_ = std::move(st);
}

// ---------------------------------------------------------------------------
// Operators

ScalarField l_field(const PolarGrid& grid) {
  ScalarField l(grid.size());
  const double c = grid.spec().cos_theta();
  for (std::size_t k = 0; k < l.size(); ++k) l[k] = 1.0 - c * std::cos(grid.node_r(k));
  // The boundary ring sits at r = theta where l = sin^2 theta exactly.
  const double s = grid.spec().sin_theta();
  for (int j = 0; j < grid.nphi(); ++j) l[grid.index(grid.nr() - 1, j)] = s * s;
  return l;
}

FrameVector grad_at(std::span<const double> field, const PolarGrid& grid, std::size_t node) {
  const auto& st = grid.stencils();
  return {st.grad_r.apply(field, node), st.grad_phi.apply(field, node)};
}

FrameSymMatrix hessian_at(std::span<const double> field, const PolarGrid& grid, std::size_t node) {
  const auto& st = grid.stencils();
  return {st.hess_rr.apply(field, node), st.hess_rphi.apply(field, node), st.hess_phiphi.apply(field, node)};
}

FrameVector grad_at(const RingSplitField& field, const PolarGrid& grid, std::size_t node) {
  const auto& st = grid.stencils();
  return {st.grad_r.apply(field, node), st.grad_phi.apply(field, node)};
}

FrameSymMatrix hessian_at(const RingSplitField& field, const PolarGrid& grid, std::size_t node) {
  const auto& st = grid.stencils();
  return {st.hess_rr.apply(field, node), st.hess_rphi.apply(field, node), st.hess_phiphi.apply(field, node)};
}

std::vector<FrameVector> grad(std::span<const double> field, const PolarGrid& grid) {
  std::vector<FrameVector> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = grad_at(field, grid, k);
  return out;
}

std::vector<FrameSymMatrix> hessian(std::span<const double> field, const PolarGrid& grid) {
  std::vector<FrameSymMatrix> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = hessian_at(field, grid, k);
  return out;
}

std::vector<double> normal_derivative(std::span<const double> field, const PolarGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.nphi()));
  const int ring = grid.nr() - 1;
  for (int j = 0; j < grid.nphi(); ++j) {
    out[static_cast<std::size_t>(j)] = grid.stencils().grad_r.apply(field, grid.index(ring, j));
  }
  return out;
}

double integrate(std::span<const double> field, const PolarGrid& grid) {
  const auto& w = grid.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * field[k];
  return acc;
}

}  // namespace capdual
