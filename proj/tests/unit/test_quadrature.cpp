#include <cmath>

#include "doctest.h"
#include "oddflow/quadrature.hpp"
#include "oddflow/types.hpp"

using namespace oddflow;

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre is exact to degree 2n-1") {
  const quad::Rule& g = quad::gauss_legendre(6);
  CHECK(g.weights.sum() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK((g.weights * g.nodes.pow(10)).sum() == doctest::Approx(2.0 / 11).epsilon(1e-14));
  CHECK((g.weights * g.nodes.pow(11)).sum() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("Duffy rule integrates 1/r over a square with the singular corner") {
  const quad::PointRule r = quad::duffy_rectangle(0, 0, 1, 1, 16);
  const double v = (r.w / (r.y1.square() + r.y2.square()).sqrt()).sum();
  CHECK(v == doctest::Approx(2 * std::log(1 + std::sqrt(2.0))).epsilon(1e-13));
}

TEST_CASE("quadtree resolves the corner kernel") {
  auto kernel = [](const Eigen::ArrayXd& y1, const Eigen::ArrayXd& y2) {
    Eigen::ArrayXXd out(y1.size(), y2.size());
    for (Eigen::Index j = 0; j < y2.size(); ++j) out.col(j) = y1 * y2(j) / (y1.square() + y2(j) * y2(j)).square();
    return out;
  };
  for (double a : {0.5, 0.02, 1e-4}) {
    const quad::QuadtreeResult r = quad::integrate_quadtree(kernel, {a, 1, a, 1});
    const double exact = 0.25 * (2 * std::log1p(a * a) - std::log(4 * a * a));
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-9));
    CHECK(std::abs(r.value - exact) <= r.error + 1e-12);
  }
}

TEST_CASE("Chebyshev interpolation reproduces polynomials") {
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(7, 0.1, 0.9);
  const Eigen::ArrayXd nodes = quad::chebyshev_points(6, 0.0, 1.0);
  const Eigen::MatrixXd L = quad::chebyshev_interpolation_matrix(6, 0.0, 1.0, x);
  const Eigen::VectorXd f = nodes.pow(5).matrix();
  CHECK(((L * f).array() - x.pow(5)).abs().maxCoeff() < 1e-13);
}

}
