#pragma once

// Quadrature building blocks: Gauss-Legendre and Chebyshev nodes, composite
// tensor rules, Duffy rules for corner singularities, and an adaptive
// quadtree integrator over rectangles.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oddflow::quad {

/// n-point Gauss-Legendre rule on [-1, 1].
struct Rule {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
};
const Rule& gauss_legendre(int n);

/// Composite Gauss rule on consecutive panels [breaks[i], breaks[i+1]].
Rule composite(const std::vector<double>& breaks, int order);

/// Chebyshev points of the second kind mapped to [a, b] (m >= 2 points).
Eigen::ArrayXd chebyshev_points(int m, double a, double b);

/// Barycentric interpolation matrix L with L(q, j) = l_j(x_q) for the
/// Chebyshev points of chebyshev_points(m, a, b).
Eigen::MatrixXd chebyshev_interpolation_matrix(int m, double a, double b, const Eigen::ArrayXd& x);

struct Rect {
  double lo1, hi1, lo2, hi2;
  double area() const { return (hi1 - lo1) * (hi2 - lo2); }
};

/// Point set with weights for a 2D rule.
struct PointRule {
  Eigen::ArrayXd y1, y2, w;
};

/// Rule for integrals over the rectangle spanned by `apex` and `opposite`
/// whose integrand has an O(1/r) singularity at the apex corner. Each of the
/// two triangles is mapped to the unit square by the Duffy transform, which
/// cancels the singularity.
PointRule duffy_rectangle(double apex1, double apex2, double opposite1, double opposite2, int order);

/// f(y1, y2) evaluated on the tensor grid y1 x y2 (rows follow y1).
using TensorFn = std::function<Eigen::ArrayXXd(const Eigen::ArrayXd&, const Eigen::ArrayXd&)>;

struct QuadtreeOptions {
  int order = 8;            // Gauss points per axis per cell
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;
  double max_initial_cell = 0.25;
  int max_depth = 40;
  long max_evaluated_cells = 2'000'000;
};

struct QuadtreeResult {
  double value = 0.0;
  double error = 0.0;  // sum over leaves of |fine - coarse|
  long leaves = 0;
  int depth = 0;
  bool converged = true;
};

/// Adaptive quadtree: each cell is integrated with an order x order tensor
/// Gauss rule and with the same rule on its four children; cells whose two
/// estimates disagree by more than their share of the tolerance are split.
/// Evaluation is batched per column band so that f sees tensor grids.
QuadtreeResult integrate_quadtree(const TensorFn& f, const Rect& region, const QuadtreeOptions& opts = {});

}  // namespace oddflow::quad
