#include <cmath>

#include "doctest.h"
#include "oddflow/field.hpp"

using namespace oddflow;

TEST_SUITE("field") {

TEST_CASE("a single mode evaluates to sin sin everywhere on the torus") {
  const SpectralField f = SpectralField::mode({2, 3}, 8);
  for (double x1 : {-0.9, -0.3, 0.0, 0.2, 0.77}) {
    for (double x2 : {-0.5, 0.1, 0.6, 0.99}) {
      CHECK(f(x1, x2) == doctest::Approx(std::sin(2 * kPi * x1) * std::sin(3 * kPi * x2)).epsilon(1e-14));
    }
  }
  CHECK(f.l2_norm() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("grid projection round trip and its symmetry check") {
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(11, 11);
  c(1, 1) = 1.0;
  c(4, 7) = -0.25;
  c(10, 3) = 0.125;
  const SpectralField f(c, Parity::OddOdd);
  const GridField g = to_grid(f, 32);
  const Projection p = project(g, 10);
  CHECK((p.field.coeffs() - c).abs().maxCoeff() < 1e-14);
  CHECK(p.discarded_l2 < 1e-14);
  CHECK(g.l2_norm() == doctest::Approx(f.l2_norm()).epsilon(1e-12));

  GridField bad = g;
  bad.values(0, 5) = 1.0;
  CHECK_THROWS_AS(project(bad), SymmetryError);
}

TEST_CASE("spectral derivatives of a mode") {
  const SpectralField f = SpectralField::mode({1, 2}, 4);
  const SpectralField d1 = derivative(f, 1);
  const SpectralField d22 = derivative(f, 2, 2);
  CHECK(d1.parity() == Parity::EvenOdd);
  CHECK(d22.parity() == Parity::OddOdd);
  const double x1 = 0.3, x2 = 0.45;
  CHECK(d1(x1, x2) == doctest::Approx(kPi * std::cos(kPi * x1) * std::sin(2 * kPi * x2)).epsilon(1e-13));
  CHECK(d22(x1, x2) == doctest::Approx(-4 * kPi * kPi * f(x1, x2)).epsilon(1e-13));
  CHECK_THROWS_AS(derivative(f, 3), ParameterError);
}

TEST_CASE("sup norm search") {
  const SpectralField f = SpectralField::mode({1, 1}, 8);
  const SupResult whole = sup_norm_on(f, SubdomainBox::unit());
  CHECK(whole.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(whole.location[0] == doctest::Approx(0.5).epsilon(1e-5));

  const SupResult corner = sup_norm_on(f, SubdomainBox::corner(0.25));
  CHECK(corner.value == doctest::Approx(0.5).epsilon(1e-12));

  const SupResult grad = sup_norm_on({derivative(f, 1), derivative(f, 2)}, ComponentNorm::Euclidean, SubdomainBox::unit());
  CHECK(grad.value == doctest::Approx(kPi).epsilon(1e-10));
}

TEST_CASE("boxes must lie in the quadrant") {
  CHECK_THROWS_AS(SubdomainBox(0.5, 0.2, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(SubdomainBox(0.0, 1.5, 0.0, 1.0), DomainError);
  CHECK(SubdomainBox::corner(0.1).contains(Point(0.1, 0.0)));
}

}
