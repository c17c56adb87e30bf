#pragma once

// Measurements along a run: the singular corner integral that drives the
// velocity near the origin, the remainders B_j of the velocity expansion,
// gradient and Hessian sups, log-sum drift of a trajectory, exponential
// growth fits and the axis-derivative residual of part-(ii) runs.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "oddflow/biot_savart.hpp"
#include "oddflow/evolution.hpp"
#include "oddflow/field.hpp"

namespace oddflow {

/// x~ = (-x1, x2) and x- = (x1, -x2).
inline Point reflect_x1(const Point& x) { return {-x[0], x[1]}; }
inline Point reflect_x2(const Point& x) { return {x[0], -x[1]}; }
/// Q(x) = [x1, 1] x [x2, 1].
SubdomainBox corner_region(const Point& x);

struct KeyIntegralOptions {
  int order = 8;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  long max_evaluated_cells = 400'000;
};

struct KeyIntegralResult {
  double value = 0.0;
  double error = 0.0;
  SubdomainBox region = SubdomainBox::unit();
  long leaves = 0;
  int depth = 0;
  bool converged = true;
};

/// I(x) = (4/pi) int_{Q(2x)} y1 y2 / |y|^4 w(y) dy. Throws DomainError
/// unless 0 < x_i and 2 x_i < 1.
KeyIntegralResult key_integral(const FieldSampler& omega, const Point& x, const KeyIntegralOptions& opts = {});
KeyIntegralResult key_integral(const SpectralField& omega, const Point& x, const KeyIntegralOptions& opts = {});

enum class MinBranch { Log, Gradient };
std::string_view to_string(MinBranch b);

struct BjResidual {
  int j = 1;
  double B = 0.0;               // (-1)^j u_j(x) / x_j - I(x)
  double key_integral = 0.0;
  double key_integral_error = 0.0;
  double velocity = 0.0;        // u_j(x)
  double log_branch = 0.0;      // log(1 + x2/x1) for j = 1, log(1 + x1/x2) for j = 2
  double gradient_branch = 0.0; // x2 M / ||w||_inf for j = 1, x1 M / ||w||_inf for j = 2
  double bracket = 1.0;         // 1 + min of the two branches
  MinBranch min_branch_used = MinBranch::Log;
  double M = 0.0;               // sup |grad w| on [0, 2x2]^2 (j = 1) or [0, 2x1]^2 (j = 2)
  double omega_sup = 0.0;
  /// |B| / (||w||_inf * bracket)
  double ratio() const { return omega_sup > 0.0 ? std::abs(B) / (omega_sup * bracket) : 0.0; }
};

struct BjOptions {
  KeyIntegralOptions quadrature;
  double omega_sup = 0.0;        // reuse a known ||w||_inf (0: computed)
  int sup_grid = 0;              // grid for the gradient sup (0: default of sup_norm_on)
};

/// Throws DomainError if x_j = 0 (or x outside the key-integral domain).
BjResidual bj_residual(const SpectralField& omega, const VelocityField& u, const Point& x, int j,
                       const BjOptions& opts = {});
/// Shares one key integral between j = 1 and j = 2.
std::array<BjResidual, 2> bj_residuals(const SpectralField& omega, const VelocityField& u, const Point& x,
                                       const BjOptions& opts = {});

struct LogSumSample {
  double t = 0.0;
  double rate1 = 0.0;  // u1 / X1
  double rate2 = 0.0;  // u2 / X2
  double drift() const { return rate1 + rate2; }
};

struct LogSumDrift {
  std::vector<LogSumSample> series;
  double sup_drift = 0.0;  // sup |u1/X1 + u2/X2|
  double sup_part = 0.0;   // sup max(|u1/X1|, |u2/X2|)
  bool underflow = false;  // some coordinate was not a positive normal number
};

/// d/dt [log X1 + log X2] = u1/X1 + u2/X2 along the stored samples.
LogSumDrift logsum_drift(const Trajectory& traj);

enum class GrowthQuantity { GradSup, HessianSup, Other };
std::string_view to_string(GrowthQuantity q);

struct GrowthFit {
  double t0 = 0.0, t1 = 0.0;
  double rate = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int samples = 0;
  GrowthQuantity quantity = GrowthQuantity::Other;
};

/// Least squares fit of log q against t over the samples with t0 <= t <= t1.
/// Throws FitError with fewer than 10 samples or a nonpositive one.
GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& q, GrowthQuantity quantity,
                     double t0, double t1);
/// Window from the end of the initial transient (a fraction of the span) to the last sample.
GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& q, GrowthQuantity quantity,
                     double transient_fraction = 0.1);

/// sup_s |d1 w(0, s)| over s in [0, 1].
SupResult axis_derivative_residual(const SpectralField& omega, int samples = 0);

/// sup |grad w| and the sup of the max-abs Hessian entry on a box.
SupResult gradient_sup(const SpectralField& omega, const SubdomainBox& box, int n = 0);
SupResult hessian_sup(const SpectralField& omega, const SubdomainBox& box, int n = 0);

/// One row of the diagnostics series. Trajectory columns are NaN once the
/// path has left its box or when no path is traced.
struct DiagnosticsRecord {
  double t = 0.0;
  SupResult grad;
  SupResult hessian;
  double X1 = 0.0, X2 = 0.0;
  double u1 = 0.0, u2 = 0.0;
  double log_sum = 0.0;     // log X1 + log X2
  double logsum_rate = 0.0; // u1/X1 + u2/X2
  double omega_at_X = 0.0;
  double key_integral = 0.0;
  double key_integral_error = 0.0;
  double B1 = 0.0, B2 = 0.0;
  double bracket1 = 0.0, bracket2 = 0.0;
  MinBranch branch1 = MinBranch::Log, branch2 = MinBranch::Log;
  double M1 = 0.0, M2 = 0.0;
  double axis_residual = 0.0;
  MonitorRecord monitors;
};

/// Column names of the CSV series, in order.
const std::vector<std::string>& diagnostics_columns();
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& rows,
                           const std::string& config_hash);

nlohmann::json to_json(const GrowthFit& fit);
nlohmann::json to_json(const SupResult& s);

}  // namespace oddflow
