#include <cmath>

#include "doctest.h"
#include "oddflow/diagnostics.hpp"
#include "oddflow/initial_data.hpp"

using namespace oddflow;

namespace {

InitialData make(DataKind kind, double delta, double alpha = 0.5) {
  InitialDataSpec s;
  s.kind = kind;
  s.delta = delta;
  s.alpha = alpha;
  return InitialData(s);
}

}  // namespace

TEST_SUITE("initial_data") {

TEST_CASE("parameter validation") {
  InitialDataSpec s;
  s.alpha = 1.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s.alpha = 0.5;
  s.delta = 0.2;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s.delta = 0.1;
  CHECK_NOTHROW(s.validate());
  CHECK(data_kind_from_string("part_ii") == DataKind::PartII);
  CHECK_THROWS(data_kind_from_string("part_iii"));
}

TEST_CASE("smooth step is flat at both ends") {
  CHECK(smooth_step(-0.1) == 0.0);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
}

TEST_CASE("part (i) corner profile") {
  for (double alpha : {0.25, 0.5, 0.8}) {
    const InitialData d = make(DataKind::PartI, 0.05, alpha);
    for (double s : {1e-4, 0.003, 0.02, 0.05}) CHECK(d(s, s) == doctest::Approx(std::pow(s, 1 + alpha)).epsilon(1e-13));
    const double r = 0.02, phi = 0.4;
    CHECK(d(r * std::cos(phi), r * std::sin(phi)) ==
          doctest::Approx(std::pow(r / std::sqrt(2.0), 1 + alpha) * std::sin(2 * phi)).epsilon(1e-12));
  }
}

TEST_CASE("part (ii) strips carry sin^3 sin") {
  const InitialData d = make(DataKind::PartII, 0.08);
  for (double x2 : {0.1, 0.5, 0.93}) {
    for (double x1 : {0.0, 0.005, 0.02}) {
      CHECK(d(x1, x2) == doctest::Approx(std::pow(std::sin(kPi * x1), 3) * std::sin(kPi * x2)).epsilon(1e-14));
      CHECK(d(x2, x1) == doctest::Approx(std::pow(std::sin(kPi * x2), 3) * std::sin(kPi * x1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("odd reflections and periodicity") {
  const InitialData d = make(DataKind::PartI, 0.1);
  for (const Point& x : {Point(0.3, 0.6), Point(0.05, 0.9)}) {
    CHECK(d(-x[0], x[1]) == -d(x));
    CHECK(d(x[0], -x[1]) == -d(x));
    CHECK(d(x[0] + 2.0, x[1]) == doctest::Approx(d(x)).epsilon(1e-12));
  }
}

TEST_CASE("audits pass on a coarse grid") {
  for (DataKind k : {DataKind::PartI, DataKind::PartII}) {
    const AuditReport r = audit(make(k, 0.05), 1024);
    CHECK(r.passed);
    CHECK(r.plateau_measure >= r.plateau_required);
    CHECK(r.min_value >= 0.0);
    CHECK(r.sup_norm == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("constrained part (ii) projection has no axis derivative") {
  const InitialData d = make(DataKind::PartII, 0.1);
  const SpectralField w = d.spectral(128, 85).field;
  CHECK(axis_derivative_residual(w).value < 1e-10);
}

}
