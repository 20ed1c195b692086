#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "bergman/mesh.hpp"

namespace bergman {

/// Polar sub-panel midpoint rule. A cell is cut into n_r = k radial rows and
/// n_theta = k * max(1, ceil(2 pi r_outer dtheta / dr)) angular columns so that
/// panels stay roughly square; cells within 2^-J of the evaluation point use
/// near_factor times as many panels in each direction. Each panel carries its
/// exact dA_alpha mass at a node whose squared radius is the dA_alpha mean of
/// |xi|^2 over its row.
struct QuadratureSpec {
  int eval_depth = 8;
  int k = 4;
  int near_factor = 4;
};

struct ProjectionSample {
  std::vector<double> angle;
  std::vector<double> radius;
  Eigen::VectorXcd values;
  QuadratureSpec quadrature;
  double alpha = 0.0;
  /// Nodes moved off a near-singular position (|1 - z conj(xi)| < 1e-12).
  std::size_t perturbed = 0;
};

/// Evaluation points: polar midpoints of the cells of the dyadic mesh of
/// depth eval_depth, in cell order.
std::vector<std::complex<double>> evaluation_points(int eval_depth);

/// Matrix of cell kernel integrals int_cell (1 - z conj(xi))^-(2+alpha) dA_alpha(xi)
/// for every evaluation point z (rows) and source cell (columns).
class KernelMatrix {
 public:
  KernelMatrix(MeshPtr source, double alpha, QuadratureSpec spec);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const MeshPtr& source() const { return source_; }
  double alpha() const { return alpha_; }
  const QuadratureSpec& spec() const { return spec_; }
  std::size_t perturbed() const { return perturbed_; }

  ProjectionSample apply(const ComplexFunction& f) const;
  ProjectionSample apply(const RealFunction& f) const { return apply(to_complex(f)); }

 private:
  MeshPtr source_;
  double alpha_;
  QuadratureSpec spec_;
  Eigen::MatrixXcd matrix_;
  std::size_t perturbed_ = 0;
};

ProjectionSample bergman_project(const ComplexFunction& f, double alpha, int eval_depth, int k);
ProjectionSample bergman_project(const RealFunction& f, double alpha, int eval_depth, int k);

/// Projection of a pointwise integrand, sampled at the quadrature nodes of
/// the dyadic mesh of depth eval_depth.
ProjectionSample bergman_project(const std::function<std::complex<double>(std::complex<double>)>& f,
                                 double alpha, int eval_depth, int k);

void write_projection_csv(std::ostream& out, const ProjectionSample& sample);

}  // namespace bergman
