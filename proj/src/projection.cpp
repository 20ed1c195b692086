#include "bergman/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "bergman/report.hpp"

namespace bergman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Nodes {
  // conj(xi) and complex node weights (panel mass times integrand value).
  std::vector<double> cr, ci, wr, wi;
};

struct CellShape {
  double r1, r2, theta0, length;
};

CellShape shape(const Mesh& mesh, std::size_t cell) {
  const int b = mesh.cell_band(cell);
  return {mesh.band_inner(b), mesh.band_outer(b), ticks_to_angle(mesh.cell_start(cell)),
          static_cast<double>(mesh.cell_length(cell)) / static_cast<double>(kCircleTicks)};
}

using Integrand = std::function<std::complex<double>(std::complex<double>)>;

// Radius whose square is the dA_alpha average of |xi|^2 over the annulus
// [a, b): the midpoint in the area variable, so radial moments of order two
// are integrated exactly.
double node_radius(double a, double b, double alpha) {
  const double sa = one_minus_sq(a);
  const double sb = one_minus_sq(b);
  const double e = alpha + 1.0;
  // <1 - r^2> = e / (e + 1) * (sa^(e+1) - sb^(e+1)) / (sa^e - sb^e)
  const double la = std::log(sa), lb = std::log(sb);
  const double num = std::expm1((e + 1.0) * (lb - la));
  const double den = std::expm1(e * (lb - la));
  const double mean = e / (e + 1.0) * sa * num / den;
  return std::sqrt(1.0 - mean);
}

Nodes build_nodes(const CellShape& s, double alpha, int k, const Integrand* g) {
  const double aspect = kTwoPi * s.r2 * s.length / (s.r2 - s.r1);
  const int n_r = k;
  const int n_t = k * std::max(1, static_cast<int>(std::ceil(aspect)));
  Nodes n;
  const std::size_t total = static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_t);
  n.cr.reserve(total);
  n.ci.reserve(total);
  n.wr.reserve(total);
  n.wi.reserve(total);
  const double dt = s.length / n_t;
  for (int i = 0; i < n_r; ++i) {
    const double a = s.r1 + (s.r2 - s.r1) * i / n_r;
    const double b = i + 1 == n_r ? s.r2 : s.r1 + (s.r2 - s.r1) * (i + 1) / n_r;
    const double rho = node_radius(a, b, alpha);
    const double mass = dt * annulus_mass(a, b, alpha);
    for (int j = 0; j < n_t; ++j) {
      const double theta = kTwoPi * (s.theta0 + (j + 0.5) * dt);
      const double xr = rho * std::cos(theta);
      const double xi = rho * std::sin(theta);
      std::complex<double> w(mass, 0.0);
      if (g) w *= (*g)(std::complex<double>(xr, xi));
      n.cr.push_back(xr);
      n.ci.push_back(-xi);
      n.wr.push_back(w.real());
      n.wi.push_back(w.imag());
    }
  }
  return n;
}

/// Distance from z to the closed polar rectangle.
double distance_to_cell(std::complex<double> z, const CellShape& s) {
  const double r = std::abs(z);
  double phi = std::arg(z) / kTwoPi;
  phi -= std::floor(phi);
  double rel = phi - s.theta0;
  rel -= std::floor(rel);
  if (rel <= s.length) return std::max({0.0, s.r1 - r, r - s.r2});
  double best = std::numeric_limits<double>::infinity();
  for (double edge : {s.theta0, s.theta0 + s.length}) {
    const double d_ang = kTwoPi * (phi - edge);
    const double proj = std::clamp(r * std::cos(d_ang), s.r1, s.r2);
    const std::complex<double> e = std::polar(proj, kTwoPi * edge);
    best = std::min(best, std::abs(z - e));
  }
  return best;
}

struct KernelSum {
  double exponent;
  int integer_power;  // > 0 when 2 + alpha is an integer
  std::size_t perturbed = 0;

  explicit KernelSum(double alpha) : exponent(2.0 + alpha), integer_power(0) {
    const double r = std::round(exponent);
    if (std::abs(exponent - r) == 0.0 && r <= 16.0) integer_power = static_cast<int>(r);
  }

  std::complex<double> operator()(std::complex<double> z, const Nodes& n, double half_panel) {
    const double zr = z.real();
    const double zi = z.imag();
    double sr = 0.0, si = 0.0;
    const std::size_t count = n.cr.size();
    for (std::size_t q = 0; q < count; ++q) {
      double cr = n.cr[q], ci = n.ci[q];
      double wr = 1.0 - (zr * cr - zi * ci);
      double wi = -(zr * ci + zi * cr);
      if (wr * wr + wi * wi < 1e-24) {
        const std::complex<double> moved = std::complex<double>(cr, ci) * std::polar(1.0, -half_panel);
        cr = moved.real();
        ci = moved.imag();
        wr = 1.0 - (zr * cr - zi * ci);
        wi = -(zr * ci + zi * cr);
        ++perturbed;
      }
      double kr, ki;
      if (integer_power > 0) {
        const double d = wr * wr + wi * wi;
        const double ir = wr / d, ii = -wi / d;
        kr = ir;
        ki = ii;
        for (int e = 1; e < integer_power; ++e) {
          const double tr = kr * ir - ki * ii;
          ki = kr * ii + ki * ir;
          kr = tr;
        }
      } else {
        const double lr = 0.5 * std::log(wr * wr + wi * wi);
        const double li = std::atan2(wi, wr);
        const double mag = std::exp(-exponent * lr);
        kr = mag * std::cos(-exponent * li);
        ki = mag * std::sin(-exponent * li);
      }
      sr += kr * n.wr[q] - ki * n.wi[q];
      si += kr * n.wi[q] + ki * n.wr[q];
    }
    return {sr, si};
  }
};

void validate(double alpha, const QuadratureSpec& spec) {
  require_alpha(alpha);
  if (spec.k < 1) throw std::invalid_argument("quadrature subdivision k must be >= 1");
  if (spec.near_factor < 1) throw std::invalid_argument("near-cell factor must be >= 1");
  if (spec.eval_depth < 1 || spec.eval_depth > Mesh::kMaxDepth) throw std::invalid_argument("bad evaluation depth");
}

/// Calls sink(point_index, cell, value) for every (point, cell) pair.
template <typename Sink>
std::size_t integrate_cells(const Mesh& source, double alpha, const QuadratureSpec& spec,
                            const std::vector<std::complex<double>>& points, const Integrand* g, Sink&& sink) {
  KernelSum kernel(alpha);
  const double near = std::ldexp(1.0, -spec.eval_depth);
  for (std::size_t c = 0; c < source.size(); ++c) {
    const CellShape s = shape(source, c);
    const Nodes coarse = build_nodes(s, alpha, spec.k, g);
    std::optional<Nodes> fine;
    const double half_panel = 0.5 * kTwoPi * s.length / static_cast<double>(coarse.cr.size() / spec.k);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (distance_to_cell(points[i], s) < near) {
        if (!fine) fine = build_nodes(s, alpha, spec.k * spec.near_factor, g);
        sink(i, c, kernel(points[i], *fine, half_panel / spec.near_factor));
      } else {
        sink(i, c, kernel(points[i], coarse, half_panel));
      }
    }
  }
  return kernel.perturbed;
}

ProjectionSample make_sample(double alpha, const QuadratureSpec& spec) {
  ProjectionSample out;
  out.alpha = alpha;
  out.quadrature = spec;
  const auto mesh = Mesh::dyadic(spec.eval_depth);
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    out.angle.push_back(mesh->cell_angle_mid(c));
    out.radius.push_back(mesh->cell_radius_mid(c));
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> evaluation_points(int eval_depth) {
  const auto mesh = Mesh::dyadic(eval_depth);
  std::vector<std::complex<double>> pts;
  pts.reserve(mesh->size());
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    pts.push_back(std::polar(mesh->cell_radius_mid(c), kTwoPi * mesh->cell_angle_mid(c)));
  }
  return pts;
}

KernelMatrix::KernelMatrix(MeshPtr source, double alpha, QuadratureSpec spec)
    : source_(std::move(source)), alpha_(alpha), spec_(spec) {
  validate(alpha, spec);
  const auto points = evaluation_points(spec.eval_depth);
  matrix_.resize(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(source_->size()));
  perturbed_ = integrate_cells(*source_, alpha, spec, points, nullptr,
                               [&](std::size_t i, std::size_t c, std::complex<double> v) {
                                 matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
                               });
}

ProjectionSample KernelMatrix::apply(const ComplexFunction& f) const {
  if (!source_->refines(f.mesh())) throw std::invalid_argument("kernel source mesh does not refine the function mesh");
  ProjectionSample out = make_sample(alpha_, spec_);
  out.values = matrix_ * f.on(source_).values();
  out.perturbed = perturbed_;
  return out;
}

ProjectionSample bergman_project(const ComplexFunction& f, double alpha, int eval_depth, int k) {
  return KernelMatrix(f.mesh_ptr(), alpha, {eval_depth, k, 4}).apply(f);
}

ProjectionSample bergman_project(const RealFunction& f, double alpha, int eval_depth, int k) {
  return bergman_project(to_complex(f), alpha, eval_depth, k);
}

ProjectionSample bergman_project(const Integrand& f, double alpha, int eval_depth, int k) {
  const QuadratureSpec spec{eval_depth, k, 4};
  validate(alpha, spec);
  ProjectionSample out = make_sample(alpha, spec);
  const auto points = evaluation_points(eval_depth);
  out.values = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(points.size()));
  out.perturbed = integrate_cells(*Mesh::dyadic(eval_depth), alpha, spec, points, &f,
                                  [&](std::size_t i, std::size_t, std::complex<double> v) {
                                    out.values[static_cast<Eigen::Index>(i)] += v;
                                  });
  return out;
}

void write_projection_csv(std::ostream& out, const ProjectionSample& s) {
  out << "point_angle,point_radius,re,im\n";
  for (std::size_t i = 0; i < s.angle.size(); ++i) {
    const auto v = s.values[static_cast<Eigen::Index>(i)];
    out << format_double(s.angle[i]) << ',' << format_double(s.radius[i]) << ',' << format_double(v.real())
        << ',' << format_double(v.imag()) << '\n';
  }
}

}  // namespace bergman
