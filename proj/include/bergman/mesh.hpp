#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "bergman/geometry.hpp"

namespace bergman {

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

/// Partition of the disk into radial bands and angular segments.
///
/// Band b < J is the annulus 1 - 2^-b <= r < 1 - 2^-(b+1), i.e. the radial
/// extent of the top-halves of level-b arcs; band J is the outer ring of the
/// level-J Carleson boxes. A dyadic mesh cuts band b at the 2^b endpoints of
/// D^0 (2^(J+1) - 1 cells). An overlay mesh additionally cuts at the
/// endpoints of D^(1/3), so every box and top of either grid up to level J
/// is an exact union of cells.
class Mesh {
 public:
  enum class Kind : std::uint8_t { Dyadic, Overlay };

  static constexpr int kMaxDepth = 20;

  static MeshPtr dyadic(int depth);
  static MeshPtr overlay(int depth);
  static MeshPtr make(int depth, Kind kind);

  int depth() const { return depth_; }
  Kind kind() const { return kind_; }
  bool is_overlay() const { return kind_ == Kind::Overlay; }
  std::size_t size() const { return band_of_.size(); }
  int band_count() const { return depth_ + 1; }

  double band_inner(int band) const;
  double band_outer(int band) const;
  std::span<const std::int64_t> band_breaks(int band) const;
  std::size_t band_offset(int band) const { return band_offset_[band]; }

  int cell_band(std::size_t cell) const { return band_of_[cell]; }
  std::int64_t cell_start(std::size_t cell) const { return start_[cell]; }
  std::int64_t cell_length(std::size_t cell) const { return length_[cell]; }
  double cell_angle_mid(std::size_t cell) const;
  double cell_radius_mid(std::size_t cell) const;
  Region cell_region(std::size_t cell) const;

  /// dA_alpha mass of every cell; sums to 1.
  Eigen::VectorXd masses(double alpha) const;
  /// Full-circle dA_alpha mass of every band.
  std::vector<double> band_masses(double alpha) const;

  std::size_t locate(double angle, double radius) const;

  /// True when every box of `grid` up to level depth() is a union of cells.
  bool aligned_with(Grid grid) const { return is_overlay() || grid == Grid::Zero; }
  /// Index (at level cell_band(cell)) of the arc of `grid` containing the cell.
  std::int64_t leaf_index(std::size_t cell, Grid grid) const;

  /// True if every cell of this mesh lies inside a single cell of `coarse`.
  bool refines(const Mesh& coarse) const;
  /// For each cell of this mesh, the cell of `coarse` containing it.
  std::vector<std::size_t> parent_cells(const Mesh& coarse) const;

  /// Calls fn(cell, angular_overlap_ticks, r_lo, r_hi) for every cell meeting
  /// the region in positive measure.
  template <typename Fn>
  void for_each_overlap(const Region& region, Fn&& fn) const;

 private:
  Mesh(int depth, Kind kind);

  template <typename Fn>
  void overlap_interval(int band, std::int64_t lo, std::int64_t hi, Fn& fn) const;

  int depth_;
  Kind kind_;
  std::vector<std::vector<std::int64_t>> breaks_;
  std::vector<std::size_t> band_offset_;
  std::vector<int> band_of_;
  std::vector<std::int64_t> start_;
  std::vector<std::int64_t> length_;
  mutable std::mutex mass_mutex_;
  mutable std::map<double, Eigen::VectorXd> mass_cache_;
};

/// The coarsest mesh refined by both arguments.
MeshPtr common_mesh(const MeshPtr& a, const MeshPtr& b);

template <typename Fn>
void Mesh::overlap_interval(int band, std::int64_t lo, std::int64_t hi, Fn& fn) const {
  const auto& br = breaks_[band];
  auto it = std::upper_bound(br.begin(), br.end(), lo);
  std::size_t seg = static_cast<std::size_t>(std::distance(br.begin(), it)) - 1;
  for (; seg < br.size(); ++seg) {
    const std::int64_t s = br[seg];
    if (s >= hi) break;
    const std::int64_t e = seg + 1 < br.size() ? br[seg + 1] : kCircleTicks;
    const std::int64_t a = std::max(s, lo);
    const std::int64_t b = std::min(e, hi);
    if (b > a) fn(band_offset_[band] + seg, b - a);
  }
}

template <typename Fn>
void Mesh::for_each_overlap(const Region& region, Fn&& fn) const {
  for (int b = 0; b < band_count(); ++b) {
    const double lo_r = std::max(region.r_inner, band_inner(b));
    const double hi_r = std::min(region.r_outer, band_outer(b));
    if (!(hi_r > lo_r)) continue;
    auto emit = [&](std::size_t cell, std::int64_t ticks) { fn(cell, ticks, lo_r, hi_r); };
    const std::int64_t a = region.start_ticks;
    const std::int64_t end = a + region.length_ticks;
    if (end <= kCircleTicks) {
      overlap_interval(b, a, end, emit);
    } else {
      overlap_interval(b, a, kCircleTicks, emit);
      overlap_interval(b, 0, end - kCircleTicks, emit);
    }
  }
}

/// A function that is constant on each cell of a mesh.
template <typename Scalar>
class MeshFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MeshFunction() = default;
  MeshFunction(MeshPtr mesh, Vector values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_) throw std::invalid_argument("mesh function needs a mesh");
    if (static_cast<std::size_t>(values_.size()) != mesh_->size()) {
      throw std::invalid_argument("mesh function value count does not match the mesh");
    }
  }

  static MeshFunction constant(MeshPtr mesh, Scalar value) {
    const auto n = static_cast<Eigen::Index>(mesh->size());
    return MeshFunction(std::move(mesh), Vector::Constant(n, value));
  }

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  Scalar operator[](std::size_t cell) const { return values_[static_cast<Eigen::Index>(cell)]; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  /// Re-expresses the function on a mesh that refines the current one.
  MeshFunction on(const MeshPtr& finer) const {
    if (finer.get() == mesh_.get()) return *this;
    const auto parents = finer->parent_cells(*mesh_);
    Vector out(static_cast<Eigen::Index>(finer->size()));
    for (std::size_t c = 0; c < parents.size(); ++c) {
      out[static_cast<Eigen::Index>(c)] = values_[static_cast<Eigen::Index>(parents[c])];
    }
    return MeshFunction(finer, std::move(out));
  }

  template <typename Op>
  auto map(Op&& op) const {
    using Out = decltype(op(std::declval<Scalar>()));
    typename MeshFunction<Out>::Vector out = values_.unaryExpr(op);
    return MeshFunction<Out>(mesh_, std::move(out));
  }

 private:
  MeshPtr mesh_;
  Vector values_;
};

using RealFunction = MeshFunction<double>;
using ComplexFunction = MeshFunction<std::complex<double>>;

template <typename A, typename B>
MeshPtr common_mesh(const MeshFunction<A>& a, const MeshFunction<B>& b) {
  return common_mesh(a.mesh_ptr(), b.mesh_ptr());
}

template <typename Scalar>
RealFunction abs(const MeshFunction<Scalar>& f) {
  return f.map([](Scalar v) { return static_cast<double>(std::abs(v)); });
}

inline RealFunction pow(const RealFunction& f, double exponent) {
  return f.map([exponent](double v) { return std::pow(v, exponent); });
}

inline ComplexFunction to_complex(const RealFunction& f) {
  return f.map([](double v) { return std::complex<double>(v, 0.0); });
}

template <typename A, typename B>
auto operator*(const MeshFunction<A>& a, const MeshFunction<B>& b) {
  using Out = decltype(std::declval<A>() * std::declval<B>());
  const MeshPtr mesh = common_mesh(a, b);
  const auto la = a.on(mesh);
  const auto lb = b.on(mesh);
  typename MeshFunction<Out>::Vector out =
      la.values().template cast<Out>().cwiseProduct(lb.values().template cast<Out>());
  return MeshFunction<Out>(mesh, std::move(out));
}

template <typename A, typename B>
auto operator/(const MeshFunction<A>& a, const MeshFunction<B>& b) {
  using Out = decltype(std::declval<A>() / std::declval<B>());
  const MeshPtr mesh = common_mesh(a, b);
  const auto la = a.on(mesh);
  const auto lb = b.on(mesh);
  typename MeshFunction<Out>::Vector out =
      la.values().template cast<Out>().cwiseQuotient(lb.values().template cast<Out>());
  return MeshFunction<Out>(mesh, std::move(out));
}

template <typename Scalar>
MeshFunction<Scalar> operator+(const MeshFunction<Scalar>& a, const MeshFunction<Scalar>& b) {
  const MeshPtr mesh = common_mesh(a, b);
  return MeshFunction<Scalar>(mesh, a.on(mesh).values() + b.on(mesh).values());
}

template <typename Scalar>
MeshFunction<Scalar> operator*(Scalar c, const MeshFunction<Scalar>& f) {
  return MeshFunction<Scalar>(f.mesh_ptr(), c * f.values());
}

RealFunction max(const RealFunction& a, const RealFunction& b);

/// Indicator of a region on `mesh`. The region must be a union of cells.
RealFunction indicator(const MeshPtr& mesh, const Region& region);

template <typename Scalar>
Scalar integrate(const MeshFunction<Scalar>& f, double alpha) {
  const Eigen::VectorXd m = f.mesh().masses(alpha);
  Scalar acc{};
  for (Eigen::Index c = 0; c < m.size(); ++c) acc += f.values()[c] * m[c];
  return acc;
}

/// Exact integral of a cellwise constant function over a polar region.
template <typename Scalar>
Scalar integrate(const MeshFunction<Scalar>& f, const Region& region, double alpha) {
  require_alpha(alpha);
  region.validate();
  Scalar acc{};
  const double per_tick = 1.0 / static_cast<double>(kCircleTicks);
  f.mesh().for_each_overlap(region, [&](std::size_t cell, std::int64_t ticks, double lo, double hi) {
    const double m = static_cast<double>(ticks) * per_tick * annulus_mass(lo, hi, alpha);
    acc += f[cell] * m;
  });
  return acc;
}

/// Average of f over the region with respect to u dA_alpha.
template <typename Scalar>
Scalar weighted_average(const MeshFunction<Scalar>& f, const RealFunction& u, const Region& region,
                        double alpha) {
  const double den = integrate(u, region, alpha);
  if (!(den > 0.0)) throw std::domain_error("average over a region of zero weighted mass");
  return integrate(f * u, region, alpha) / den;
}

template <typename Scalar>
Scalar average(const MeshFunction<Scalar>& f, const Region& region, double alpha) {
  const double den = region_mass(region, alpha);
  if (!(den > 0.0)) throw std::domain_error("average over a region of zero mass");
  return integrate(f, region, alpha) / den;
}

/// (int |f|^p w dA_alpha)^(1/p), summed in cell order.
template <typename Scalar>
double lp_norm(const MeshFunction<Scalar>& f, const RealFunction& w, double p, double alpha) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm needs p >= 1");
  const MeshPtr mesh = common_mesh(f, w);
  const auto lf = f.on(mesh);
  const auto lw = w.on(mesh);
  const Eigen::VectorXd m = mesh->masses(alpha);
  double top = 0.0;
  for (Eigen::Index c = 0; c < m.size(); ++c) top = std::max(top, std::abs(lf.values()[c]));
  if (top == 0.0 || !std::isfinite(top)) return top;
  double acc = 0.0;
  for (Eigen::Index c = 0; c < m.size(); ++c) {
    acc += std::pow(std::abs(lf.values()[c]) / top, p) * lw.values()[c] * m[c];
  }
  return top * std::pow(acc, 1.0 / p);
}

/// Weighted mass of {|f| > lambda}.
template <typename Scalar>
double level_set_mass(const MeshFunction<Scalar>& f, const RealFunction& w, double lambda, double alpha) {
  const MeshPtr mesh = common_mesh(f, w);
  const auto lf = f.on(mesh);
  const auto lw = w.on(mesh);
  const Eigen::VectorXd m = mesh->masses(alpha);
  double acc = 0.0;
  for (Eigen::Index c = 0; c < m.size(); ++c) {
    if (std::abs(lf.values()[c]) > lambda) acc += lw.values()[c] * m[c];
  }
  return acc;
}

double weak_quasinorm_impl(const Eigen::VectorXd& abs_values, const Eigen::VectorXd& weighted_mass);

/// sup_lambda lambda |{|f| > lambda}|_{w dA_alpha}, attained as lambda
/// increases to one of the finitely many values of |f|.
template <typename Scalar>
double weak_quasinorm(const MeshFunction<Scalar>& f, const RealFunction& w, double alpha) {
  const MeshPtr mesh = common_mesh(f, w);
  const auto lf = f.on(mesh);
  const auto lw = w.on(mesh);
  const Eigen::VectorXd a = lf.values().cwiseAbs().template cast<double>();
  const Eigen::VectorXd wm = lw.values().cwiseProduct(mesh->masses(alpha));
  return weak_quasinorm_impl(a, wm);
}

inline RealFunction unit(const MeshPtr& mesh) { return RealFunction::constant(mesh, 1.0); }

}  // namespace bergman
