#include <cmath>
#include <random>

#include "doctest.h"
#include "oddflow/biot_savart.hpp"

using namespace oddflow;

namespace {

SpectralField sample_field() {
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(17, 17);
  c(1, 1) = 1.0;
  c(2, 5) = -0.4;
  c(7, 3) = 0.3;
  c(16, 9) = 0.05;
  return SpectralField(c, Parity::OddOdd);
}

}  // namespace

TEST_SUITE("biot_savart") {

TEST_CASE("single mode velocity closed form") {
  const VelocityField u = velocity_spectral(SpectralField::mode({1, 1}, 4));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x1 = d(rng), x2 = d(rng);
    err = std::max(err, std::abs(u.u1(x1, x2) + std::sin(kPi * x1) * std::cos(kPi * x2) / (2 * kPi)));
    err = std::max(err, std::abs(u.u2(x1, x2) - std::cos(kPi * x1) * std::sin(kPi * x2) / (2 * kPi)));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("velocity symmetries") {
  const SpectralField w = sample_field();
  const VelocityField u = velocity_spectral(w);
  const Vec2 u0 = u(Point(0, 0));
  CHECK(u0[0] == 0.0);
  CHECK(u0[1] == 0.0);

  const VelocityField us = velocity_spectral(SpectralField(w.coeffs().transpose().eval(), Parity::OddOdd));
  for (const Point& x : {Point(0.1, 0.7), Point(-0.4, 0.25), Point(0.9, -0.6)}) {
    const Vec2 expect = -Vec2(u.u2(x[1], x[0]), u.u1(x[1], x[0]));
    CHECK((us(x) - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(sup_norm_on(divergence(u), SubdomainBox::unit()).value < 1e-12);
}

TEST_CASE("stream function solves the Poisson equation") {
  const SpectralField w = sample_field();
  const SpectralField psi = stream_function(w);
  SpectralField lap = derivative(psi, 1, 2);
  lap += derivative(psi, 2, 2);
  CHECK((lap.coeffs() - w.coeffs()).abs().maxCoeff() < 1e-13);
}

TEST_CASE("lattice sum agrees with the spectral velocity") {
  const SpectralField w = sample_field();
  const VelocityField u = velocity_spectral(w);
  LatticeSumParams p;
  p.radius = 32;
  for (const Point& x : {Point(0.12, 0.31), Point(0.4, 0.07)}) {
    const DirectVelocity d = velocity_direct(w, x, p);
    const Vec2 diff = (u(x) - d.u).cwiseAbs();
    CHECK(diff[0] <= d.tail[0] + 1e-4);
    CHECK(diff[1] <= d.tail[1] + 1e-4);
  }
}

TEST_CASE("bicubic evaluation reports its own deviation") {
  const VelocityField u = velocity_spectral(SpectralField::mode({1, 2}, 4));
  const VelocityEvaluator exact(u);
  const VelocityEvaluator cubic(u, VelocityEvaluator::Mode::Bicubic, 128);
  CHECK(exact.error_estimate() == 0.0);
  CHECK(cubic.error_estimate() < 1e-6);
  const Point x(0.333, 0.123);
  CHECK((cubic(x) - exact(x)).cwiseAbs().maxCoeff() <= 2 * cubic.error_estimate() + 1e-15);
}

}
