#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oddflow/diagnostics.hpp"
#include "oddflow/initial_data.hpp"

using namespace oddflow;

TEST_SUITE("diagnostics") {

TEST_CASE("geometry helpers") {
  const Point x(0.2, 0.3);
  CHECK(reflect_x1(x) == Point(-0.2, 0.3));
  CHECK(reflect_x2(x) == Point(0.2, -0.3));
  const SubdomainBox q = corner_region(x);
  CHECK(q.lo1() == 0.2);
  CHECK(q.lo2() == 0.3);
  CHECK(q.hi1() == 1.0);
}

TEST_CASE("key integral closed forms") {
  FunctionSampler zero([](double, double) { return 0.0; });
  CHECK(key_integral(zero, Point(0.1, 0.2)).value == 0.0);

  FunctionSampler one([](double, double) { return 1.0; });
  // (4/pi) * (1/4) (2 log(1 + a^2) - log(4 a^2)) with a = 2 x.
  for (double x : {0.25, 0.01, 1e-4}) {
    const double a = 2 * x;
    const double exact = (1 / kPi) * (2 * std::log1p(a * a) - std::log(4 * a * a));
    const KeyIntegralResult r = key_integral(one, Point(x, x));
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));
    CHECK(r.region.lo1() == doctest::Approx(a));
  }
  CHECK_THROWS_AS(key_integral(one, Point(0.5, 0.1)), DomainError);
  CHECK_THROWS_AS(key_integral(one, Point(0.0, 0.1)), DomainError);
}

TEST_CASE("key integral is monotone in a nonnegative vorticity") {
  InitialDataSpec s;
  s.kind = DataKind::PartI;
  s.delta = 0.1;
  const InitialData d(s);
  FunctionSampler big([&d](double a, double b) { return d(a, b); });
  FunctionSampler small([&d](double a, double b) { return 0.5 * d(a, b) * d(a, b); });
  for (const Point& x : {Point(0.05, 0.05), Point(0.01, 0.2)}) {
    CHECK(key_integral(big, x).value >= key_integral(small, x).value);
  }
}

TEST_CASE("B_j residuals of the single mode") {
  const SpectralField w = SpectralField::mode({1, 1}, 8);
  const VelocityField u = velocity_spectral(w);
  const Point x(0.125, 0.125);
  const BjResidual b1 = bj_residual(w, u, x, 1);
  // Frozen from the quadrature oracle.
  CHECK(b1.B == doctest::Approx(0.136504921664).epsilon(1e-9));
  CHECK(b1.log_branch == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(b1.bracket > 0.0);
  CHECK(b1.M >= 0.0);
  CHECK(b1.bracket == doctest::Approx(1 + std::min(b1.log_branch, b1.gradient_branch)));
  CHECK(-(b1.key_integral + b1.B) * x[0] == doctest::Approx(u.u1(x)).epsilon(1e-14));

  const auto both = bj_residuals(w, u, Point(0.05, 0.2));
  CHECK((both[1].key_integral + both[1].B) * 0.2 == doctest::Approx(u.u2(Point(0.05, 0.2))).epsilon(1e-14));
  CHECK(both[1].log_branch <= std::log(2.0));
  CHECK_THROWS_AS(bj_residual(w, u, Point(0.0, 0.2), 1), DomainError);
}

TEST_CASE("log-sum drift vanishes in a frozen incompressible stagnation flow") {
  const FunctionVelocity hyperbolic([](double, const Point& x) { return Vec2(-3 * x[0], 3 * x[1]); });
  const Trajectory t = trace(hyperbolic, Point(0.01, 0.02), 0.5, SubdomainBox::unit(), 1e-2);
  const LogSumDrift d = logsum_drift(t);
  CHECK(d.sup_drift < 1e-14);
  CHECK(d.sup_part == doctest::Approx(3.0));
  CHECK_FALSE(d.underflow);
}

TEST_CASE("log-sum rate matches a centred difference of the path") {
  const VelocityField u = velocity_spectral(SpectralField::mode({2, 1}, 4));
  const FunctionVelocity src([&u](double, const Point& x) { return u(x); });
  for (double h : {1e-2, 5e-3}) {
    const Trajectory f = trace(src, Point(0.1, 0.3), h, SubdomainBox::unit(), h / 8);
    const Trajectory b = trace(FunctionVelocity([&u](double, const Point& x) { return Vec2(-u(x)); }), Point(0.1, 0.3), h,
                               SubdomainBox::unit(), h / 8);
    auto ls = [](const Point& x) { return std::log(x[0]) + std::log(x[1]); };
    const double fd = (ls(f.samples.back().x) - ls(b.samples.back().x)) / (2 * h);
    const double rate = logsum_drift(f).series.front().drift();
    CHECK(std::abs(fd - rate) < 5 * h * h);
  }
}

TEST_CASE("growth fits") {
  std::vector<double> t, q, c;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.05 * i);
    q.push_back(std::exp(2.0 * t.back()));
    c.push_back(3.0);
  }
  const GrowthFit f = growth_fit(t, q, GrowthQuantity::GradSup, 0.0);
  CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.t0 < f.t1);
  CHECK(std::abs(growth_fit(t, c, GrowthQuantity::Other, 0.0).rate) < 1e-14);

  CHECK_THROWS_AS(growth_fit(t, q, GrowthQuantity::GradSup, 0.0, 0.4), FitError);
  q[5] = 0.0;
  CHECK_THROWS_AS(growth_fit(t, q, GrowthQuantity::GradSup, 0.0), FitError);
}

TEST_CASE("Hessian and gradient sups") {
  const SpectralField w = SpectralField::mode({1, 1}, 8);
  CHECK(hessian_sup(w, SubdomainBox::unit()).value == doctest::Approx(kPi * kPi).epsilon(1e-10));
  CHECK(gradient_sup(w, SubdomainBox::unit()).value == doctest::Approx(kPi).epsilon(1e-10));
  CHECK(hessian_sup(SpectralField(8), SubdomainBox::unit()).value == 0.0);
}

TEST_CASE("axis derivative residual") {
  CHECK(axis_derivative_residual(SpectralField::mode({1, 1}, 4)).value == doctest::Approx(kPi).epsilon(1e-10));
  // sin^3 = (3 sin - sin 3x) / 4 has no x1-derivative on the axis.
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(5, 5);
  c(1, 1) = 0.75;
  c(3, 1) = -0.25;
  CHECK(axis_derivative_residual(SpectralField(c, Parity::OddOdd)).value < 1e-14);
}

TEST_CASE("diagnostics CSV layout") {
  DiagnosticsRecord r;
  r.t = 0.5;
  r.B1 = std::nan("");
  const auto path = std::filesystem::temp_directory_path() / "oddflow_unit_diag.csv";
  write_diagnostics_csv(path, {r}, "feed");
  std::ifstream in(path);
  std::string hash, header, row;
  std::getline(in, hash);
  std::getline(in, header);
  std::getline(in, row);
  CHECK(hash == "# config_hash=feed");
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == static_cast<long>(diagnostics_columns().size()));
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
  CHECK(row.rfind("0.5,", 0) == 0);
}

}
