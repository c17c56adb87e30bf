#include "oddflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "oddflow/quadrature.hpp"

namespace oddflow {
namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SubdomainBox key_region(const Point& x) {
  if (!(x[0] > 0.0 && x[1] > 0.0 && 2.0 * x[0] < 1.0 && 2.0 * x[1] < 1.0)) {
    throw DomainError("key integral needs 0 < x_i < 1/2, got (" + fmt(x[0]) + ", " + fmt(x[1]) + ")");
  }
  return corner_region(2.0 * x);
}

double omega_sup_of(const SpectralField& omega, const BjOptions& opts) {
  return opts.omega_sup > 0.0 ? opts.omega_sup : sup_norm_on(omega, SubdomainBox::unit()).value;
}

void fill_branches(BjResidual& r, const SpectralField& omega, const Point& x, const BjOptions& opts) {
  const double near = r.j == 1 ? x[0] : x[1];
  const double far = r.j == 1 ? x[1] : x[0];
  const double side = std::min(1.0, 2.0 * far);
  r.M = gradient_sup(omega, SubdomainBox::corner(side), opts.sup_grid).value;
  r.log_branch = std::log1p(far / near);
  r.gradient_branch = r.omega_sup > 0.0 ? far * r.M / r.omega_sup : std::numeric_limits<double>::infinity();
  r.min_branch_used = r.gradient_branch < r.log_branch ? MinBranch::Gradient : MinBranch::Log;
  r.bracket = 1.0 + std::min(r.log_branch, r.gradient_branch);
}

}  // namespace

SubdomainBox corner_region(const Point& x) { return {x[0], 1.0, x[1], 1.0}; }

KeyIntegralResult key_integral(const FieldSampler& omega, const Point& x, const KeyIntegralOptions& opts) {
  const SubdomainBox q = key_region(x);
  KeyIntegralResult res;
  res.region = q;
  if (q.lo1() >= 1.0 || q.lo2() >= 1.0) return res;

  auto integrand = [&omega](const Eigen::ArrayXd& y1, const Eigen::ArrayXd& y2) {
    Eigen::ArrayXXd w = omega.tensor(y1, y2);
    for (Eigen::Index j = 0; j < y2.size(); ++j) {
      const Eigen::ArrayXd r2 = y1.square() + y2(j) * y2(j);
      w.col(j) *= (4.0 / kPi) * y1 * y2(j) / r2.square();
    }
    return w;
  };
  quad::QuadtreeOptions qo;
  qo.order = opts.order;
  qo.abs_tol = opts.abs_tol;
  qo.rel_tol = opts.rel_tol;
  qo.max_evaluated_cells = opts.max_evaluated_cells;
  // Cells start no larger than the distance to the corner singularity.
  qo.max_initial_cell = std::clamp(2.0 * std::min(q.lo1(), q.lo2()), 1.0 / 64, 0.25);
  const quad::QuadtreeResult r = quad::integrate_quadtree(integrand, {q.lo1(), 1.0, q.lo2(), 1.0}, qo);
  res.value = r.value;
  res.error = r.error;
  res.leaves = r.leaves;
  res.depth = r.depth;
  res.converged = r.converged;
  return res;
}

KeyIntegralResult key_integral(const SpectralField& omega, const Point& x, const KeyIntegralOptions& opts) {
  return key_integral(SpectralSampler(omega), x, opts);
}

std::string_view to_string(MinBranch b) { return b == MinBranch::Log ? "log" : "gradient"; }

BjResidual bj_residual(const SpectralField& omega, const VelocityField& u, const Point& x, int j,
                       const BjOptions& opts) {
  if (j != 1 && j != 2) throw ParameterError("bj_residual: j must be 1 or 2");
  if (x[j - 1] == 0.0) throw DomainError("bj_residual: x_j = 0, the axis limit is not supported");
  const KeyIntegralResult ki = key_integral(omega, x, opts.quadrature);
  BjResidual r;
  r.j = j;
  r.key_integral = ki.value;
  r.key_integral_error = ki.error;
  r.velocity = j == 1 ? u.u1(x) : u.u2(x);
  const double sign = j == 1 ? -1.0 : 1.0;
  r.B = sign * r.velocity / x[j - 1] - ki.value;
  r.omega_sup = omega_sup_of(omega, opts);
  fill_branches(r, omega, x, opts);
  return r;
}

std::array<BjResidual, 2> bj_residuals(const SpectralField& omega, const VelocityField& u, const Point& x,
                                       const BjOptions& opts) {
  if (x[0] == 0.0 || x[1] == 0.0) throw DomainError("bj_residuals: point on an axis");
  const KeyIntegralResult ki = key_integral(omega, x, opts.quadrature);
  const double wsup = omega_sup_of(omega, opts);
  std::array<BjResidual, 2> out;
  for (int j = 1; j <= 2; ++j) {
    BjResidual& r = out[j - 1];
    r.j = j;
    r.key_integral = ki.value;
    r.key_integral_error = ki.error;
    r.velocity = j == 1 ? u.u1(x) : u.u2(x);
    r.B = (j == 1 ? -1.0 : 1.0) * r.velocity / x[j - 1] - ki.value;
    r.omega_sup = wsup;
    fill_branches(r, omega, x, opts);
  }
  return out;
}

LogSumDrift logsum_drift(const Trajectory& traj) {
  LogSumDrift d;
  const double t_end = traj.effective_horizon();
  for (const TrajectorySample& s : traj.samples) {
    if (s.t > t_end + 1e-12) break;
    if (!(std::isnormal(s.x[0]) && std::isnormal(s.x[1]) && s.x[0] > 0.0 && s.x[1] > 0.0)) {
      d.underflow = true;
      continue;
    }
    LogSumSample ls{s.t, s.u[0] / s.x[0], s.u[1] / s.x[1]};
    d.sup_drift = std::max(d.sup_drift, std::abs(ls.drift()));
    d.sup_part = std::max({d.sup_part, std::abs(ls.rate1), std::abs(ls.rate2)});
    d.series.push_back(ls);
  }
  return d;
}

std::string_view to_string(GrowthQuantity q) {
  switch (q) {
    case GrowthQuantity::GradSup: return "grad_sup";
    case GrowthQuantity::HessianSup: return "hessian_sup";
    case GrowthQuantity::Other: return "other";
  }
  return "other";
}

GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& q, GrowthQuantity quantity,
                     double t0, double t1) {
  if (t.size() != q.size()) throw FitError("growth_fit: series lengths differ");
  if (!(t0 < t1)) throw FitError("growth_fit: empty window");
  std::vector<double> ts, ys;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!(q[i] > 0.0) || !std::isfinite(q[i])) throw FitError("growth_fit: nonpositive sample at t = " + fmt(t[i]));
    ts.push_back(t[i]);
    ys.push_back(std::log(q[i]));
  }
  if (ts.size() < 10) throw FitError("growth_fit: fewer than 10 samples in window");

  const Eigen::Map<const Eigen::ArrayXd> tv(ts.data(), ts.size()), yv(ys.data(), ys.size());
  const double tm = tv.mean(), ym = yv.mean();
  const double stt = (tv - tm).square().sum();
  if (stt == 0.0) throw FitError("growth_fit: all samples at one time");
  GrowthFit f;
  f.t0 = t0;
  f.t1 = t1;
  f.quantity = quantity;
  f.samples = static_cast<int>(ts.size());
  f.rate = ((tv - tm) * (yv - ym)).sum() / stt;
  f.intercept = ym - f.rate * tm;
  const double ss_tot = (yv - ym).square().sum();
  const double ss_res = (yv - f.intercept - f.rate * tv).square().sum();
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& q, GrowthQuantity quantity,
                     double transient_fraction) {
  if (t.empty()) throw FitError("growth_fit: empty series");
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  return growth_fit(t, q, quantity, *lo + transient_fraction * (*hi - *lo), *hi);
}

SupResult axis_derivative_residual(const SpectralField& omega, int samples) {
  const SpectralField d1 = derivative(omega, 1);
  if (samples <= 0) samples = std::max(4 * omega.cutoff(), 256);
  return sup_norm_on(d1, {0.0, 0.0, 0.0, 1.0}, samples);
}

SupResult gradient_sup(const SpectralField& omega, const SubdomainBox& box, int n) {
  return sup_norm_on({derivative(omega, 1), derivative(omega, 2)}, ComponentNorm::Euclidean, box, n);
}

SupResult hessian_sup(const SpectralField& omega, const SubdomainBox& box, int n) {
  const SpectralField d1 = derivative(omega, 1);
  return sup_norm_on({derivative(omega, 1, 2), derivative(omega, 2, 2), derivative(d1, 2)}, ComponentNorm::MaxAbs,
                     box, n);
}

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols = {
      "t",          "grad_sup",       "grad_x1",      "grad_x2",      "hessian_sup", "hessian_x1",
      "hessian_x2", "X1",             "X2",           "u1",           "u2",          "log_sum",
      "logsum_rate", "omega_at_X",    "key_integral", "key_integral_error", "B1",    "B2",
      "bracket1",   "bracket2",       "branch1",      "branch2",      "M1",          "M2",
      "axis_residual", "sup_norm",    "energy",       "enstrophy",    "area_above_half", "spectral_tail",
      "dt",         "cfl_number",     "dealias_fraction"};
  return cols;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& rows,
                           const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# config_hash=" << (config_hash.empty() ? "-" : config_hash) << "\n";
  const auto& cols = diagnostics_columns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const DiagnosticsRecord& r : rows) {
    const MonitorRecord& m = r.monitors;
    const std::vector<std::string> cells = {
        fmt(r.t), fmt(r.grad.value), fmt(r.grad.location[0]), fmt(r.grad.location[1]), fmt(r.hessian.value),
        fmt(r.hessian.location[0]), fmt(r.hessian.location[1]), fmt(r.X1), fmt(r.X2), fmt(r.u1), fmt(r.u2),
        fmt(r.log_sum), fmt(r.logsum_rate), fmt(r.omega_at_X), fmt(r.key_integral), fmt(r.key_integral_error),
        fmt(r.B1), fmt(r.B2), fmt(r.bracket1), fmt(r.bracket2),
        std::isnan(r.B1) ? "nan" : std::string(to_string(r.branch1)),
        std::isnan(r.B2) ? "nan" : std::string(to_string(r.branch2)), fmt(r.M1), fmt(r.M2), fmt(r.axis_residual),
        fmt(m.sup_norm), fmt(m.energy), fmt(m.enstrophy), fmt(m.area_above_half), fmt(m.spectral_tail), fmt(m.dt),
        fmt(m.cfl_number), fmt(m.dealias_fraction)};
    for (size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  }
}

nlohmann::json to_json(const GrowthFit& fit) {
  return {{"quantity", to_string(fit.quantity)}, {"t0", fit.t0},         {"t1", fit.t1},
          {"rate", fit.rate},                   {"intercept", fit.intercept}, {"r2", fit.r2},
          {"samples", fit.samples}};
}

nlohmann::json to_json(const SupResult& s) {
  return {{"value", s.value}, {"x1", s.location[0]}, {"x2", s.location[1]}};
}

}  // namespace oddflow
