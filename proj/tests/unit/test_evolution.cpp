#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oddflow/evolution.hpp"

using namespace oddflow;

namespace {

SpectralField random_low_modes(int cutoff, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(cutoff + 1, cutoff + 1);
  for (int i = 1; i <= 6; ++i) {
    for (int j = 1; j <= 6; ++j) c(i, j) = d(rng) / (i * i + j * j);
  }
  return SpectralField(c, Parity::OddOdd);
}

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("the 2/3 cutoff") {
  CHECK(EulerSolver::dealiased_cutoff(256) == 170);
  CHECK(EulerSolver::dealiased_cutoff(512) == 341);
  CHECK(EulerSolver::dealiased_cutoff(64) == 42);
}

TEST_CASE("modes on one shell are steady") {
  const EulerSolver solver(64);
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(solver.cutoff() + 1, solver.cutoff() + 1);
  c(1, 2) = 1.0;
  c(2, 1) = 0.7;
  const EvolutionState s0 = solver.initial_state(SpectralField(c, Parity::OddOdd));
  double fraction = 1.0;
  const Eigen::ArrayXXd rhs = solver.advection(s0.omega.coeffs(), &fraction);
  CHECK(rhs.abs().maxCoeff() < 1e-13);
  EvolutionState s = s0;
  for (int i = 0; i < 10; ++i) s = solver.step(s, 0.01);
  CHECK((s.omega.coeffs() - c).abs().maxCoeff() < 1e-12);
}

TEST_CASE("energy and enstrophy are conserved and the run is reversible") {
  const EulerSolver solver(64);
  const EvolutionState s0 = solver.initial_state(random_low_modes(solver.cutoff(), 5));
  RunOptions fwd;
  fwd.horizon = 0.5;
  fwd.records = 10;
  const RunResult r = run(solver, s0, fwd);
  CHECK_FALSE(r.breached);
  const double e0 = energy(s0.omega), z0 = enstrophy(s0.omega);
  CHECK(std::abs(energy(r.final.omega) / e0 - 1) < 1e-9);
  CHECK(std::abs(enstrophy(r.final.omega) / z0 - 1) < 1e-8);

  RunOptions back = fwd;
  back.horizon = 0.0;
  const RunResult b = run(solver, r.final, back);
  CHECK((b.final.omega.coeffs() - s0.omega.coeffs()).abs().maxCoeff() < 1e-8);
  CHECK(b.final.t == doctest::Approx(0.0));
}

TEST_CASE("energy matches the velocity field") {
  const SpectralField w = SpectralField::mode({1, 1}, 8);
  // |u|^2 = (sin^2 cos^2 + cos^2 sin^2) / (4 pi^2); quadrant mean 1/4 each term.
  CHECK(energy(w) == doctest::Approx(0.5 * 2 * 0.25 / (4 * kPi * kPi)).epsilon(1e-14));
  CHECK(enstrophy(w) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("steps beyond the CFL limit are refused") {
  const EulerSolver solver(32);
  const EvolutionState s = solver.initial_state(random_low_modes(solver.cutoff(), 2));
  CHECK_THROWS_AS(solver.step(s, 2 * solver.cfl_limit(s)), CflError);
}

TEST_CASE("monitors report a sup-norm breach") {
  MonitorRecord ref, now;
  ref.sup_norm = now.sup_norm = 1.0;
  ref.energy = now.energy = ref.enstrophy = now.enstrophy = 1.0;
  Monitors m;
  CHECK(m.check(ref, now).empty());
  now.sup_norm = 1.01;
  CHECK(m.check(ref, now).find("sup-norm") != std::string::npos);
}

TEST_CASE("paths in a frozen stagnation flow") {
  const FunctionVelocity hyperbolic([](double, const Point& x) { return Vec2(-x[0], x[1]); });
  const Trajectory t = trace(hyperbolic, Point(0.01, 0.01), 10.0, SubdomainBox::corner(0.1), 1e-3);
  REQUIRE(t.exit_time.has_value());
  CHECK(*t.exit_time == doctest::Approx(std::log(10.0)).epsilon(1e-9));
  CHECK(t.exit_edge == 2);
  const TrajectorySample& last = t.samples.back();
  CHECK(last.x[0] == doctest::Approx(0.001).epsilon(1e-9));
  CHECK(last.x[1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("synchronized tracing matches direct tracing in a steady field") {
  const EulerSolver solver(32);
  const SpectralField w = SpectralField::mode({1, 1}, solver.cutoff());
  EvolutionState s = solver.initial_state(w);
  SynchronizedTracer tracer(Point(0.1, 0.2), 1.0, SubdomainBox::unit());
  tracer.observe(s);
  while (s.t < 1.0 - 1e-12) {
    s = solver.step(s, std::min(0.02, 1.0 - s.t));
    tracer.observe(s);
  }
  const VelocityField u = s.u;
  const FunctionVelocity exact([&u](double, const Point& x) { return u(x); });
  const Trajectory ref = trace(exact, Point(0.1, 0.2), 1.0, SubdomainBox::unit(), 0.02);
  CHECK((tracer.trajectory().samples.back().x - ref.samples.back().x).norm() < 1e-10);
  CHECK(transport_drift(tracer.trajectory(), w(Point(0.1, 0.2))) < 1e-9);
}

TEST_CASE("checkpoints round trip and carry the config hash") {
  const EulerSolver solver(32);
  EvolutionState s = solver.initial_state(random_low_modes(solver.cutoff(), 9), 0.25);
  Trajectory traj;
  traj.horizon = 1.0;
  traj.samples.push_back({0.25, Point(0.1, 0.2), Vec2(-0.1, 0.2), 0.3});
  const auto stem = std::filesystem::temp_directory_path() / "oddflow_unit_checkpoint";
  write_checkpoint(stem, solver, s, traj, "abc123");
  const Checkpoint cp = read_checkpoint(stem, solver, "abc123");
  CHECK((cp.state.omega.coeffs() - s.omega.coeffs()).abs().maxCoeff() < 1e-14);
  CHECK(cp.state.t == 0.25);
  REQUIRE(cp.trajectory.samples.size() == 1);
  CHECK(cp.trajectory.samples[0].omega == 0.3);
  CHECK_THROWS_AS(read_checkpoint(stem, solver, "other"), ConfigError);
}

}
