#include "oddflow/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "oddflow/snapshot.hpp"
#include "oddflow/transforms.hpp"

namespace oddflow {
namespace {

Eigen::ArrayXXd wavenumber_sq(int k) {
  const Eigen::ArrayXd kk = Eigen::ArrayXd::LinSpaced(k + 1, 0, k).square();
  Eigen::ArrayXXd out(k + 1, k + 1);
  out.colwise() = kk;
  out.rowwise() += kk.transpose();
  return out;
}

Eigen::ArrayXXd rk_combine(const Eigen::ArrayXXd& c, const Eigen::ArrayXXd& k, double h) { return c + h * k; }

// One RK4 step of X' = f(t, X).
template <class F>
Point rk4_point(const F& f, double t, const Point& x, double dt) {
  const Vec2 k1 = f(t, x);
  const Vec2 k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const Vec2 k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const Vec2 k4 = f(t + dt, x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool outside(const SubdomainBox& box, const Point& x) {
  return x[0] > box.hi1() || x[1] > box.hi2() || x[0] < box.lo1() || x[1] < box.lo2();
}

int exit_edge_of(const SubdomainBox& box, const Point& x) {
  const double o1 = std::max(x[0] - box.hi1(), box.lo1() - x[0]);
  const double o2 = std::max(x[1] - box.hi2(), box.lo2() - x[1]);
  return o1 >= o2 ? 1 : 2;
}

// Finds theta in (0,1] where the RK4 substep of length theta*dt first
// reaches the box boundary; returns (theta, point).
template <class F>
std::pair<double, Point> bisect_exit(const F& f, double t, const Point& x, double dt, const SubdomainBox& box) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (outside(box, rk4_point(f, t, x, mid * dt))) hi = mid;
    else lo = mid;
  }
  return {hi, rk4_point(f, t, x, hi * dt)};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double energy(const SpectralField& omega) {
  const Eigen::ArrayXXd kk = wavenumber_sq(omega.cutoff()) * (kPi * kPi);
  Eigen::ArrayXXd c2 = omega.coeffs().square();
  c2.row(0).setZero();
  c2.col(0).setZero();
  const Eigen::ArrayXXd safe = (kk > 0).select(kk, 1.0);
  return 0.125 * (c2 / safe).sum();
}

double enstrophy(const SpectralField& omega) { return 0.25 * omega.coeffs().square().sum(); }

EulerSolver::EulerSolver(int n, int cutoff, double cfl) : n_(n), cutoff_(cutoff), cfl_(cfl) {
  if (n < 4) throw ResolutionError("evolution grid must have N >= 4");
  if (cutoff_ <= 0) cutoff_ = dealiased_cutoff(n);
  if (3 * cutoff_ >= 2 * n) throw ResolutionError("cutoff must satisfy K < 2N/3 for dealiasing");
  if (!(cfl_ > 0.0)) throw ParameterError("CFL number must be positive");
}

int EulerSolver::dealiased_cutoff(int n) { return (2 * n + 2) / 3 - 1; }

EvolutionState EulerSolver::initial_state(const SpectralField& omega0, double t0) const {
  if (omega0.parity() != Parity::OddOdd) throw SymmetryError("evolution needs an odd-odd vorticity");
  EvolutionState s;
  s.t = t0;
  s.omega = omega0.resized(cutoff_);
  s.u = velocity_spectral(s.omega);
  s.velocity_sup = velocity_sup(s.u);
  return s;
}

double EulerSolver::velocity_sup(const VelocityField& u) const {
  const double a = transforms::synthesize(u.u1.coeffs(), Basis::Sine, Basis::Cosine, n_).abs().maxCoeff();
  const double b = transforms::synthesize(u.u2.coeffs(), Basis::Cosine, Basis::Sine, n_).abs().maxCoeff();
  return std::sqrt(a * a + b * b);
}

double EulerSolver::cfl_limit(const EvolutionState& s) const {
  if (s.velocity_sup <= 0.0) return std::numeric_limits<double>::infinity();
  return cfl_ * spacing() / s.velocity_sup;
}

Eigen::ArrayXXd EulerSolver::interior_values(const SpectralField& f) const {
  const Basis b1 = basis_x1(f.parity()), b2 = basis_x2(f.parity());
  const Eigen::ArrayXXd all = transforms::synthesize(f.coeffs(), b1, b2, n_);
  return all.block(b1 == Basis::Cosine ? 1 : 0, b2 == Basis::Cosine ? 1 : 0, n_ - 1, n_ - 1);
}

Eigen::ArrayXXd EulerSolver::advection(const Eigen::ArrayXXd& c, double* dealias_fraction) const {
  const int k = cutoff_;
  const Eigen::ArrayXd kv = Eigen::ArrayXd::LinSpaced(k + 1, 0, k) * kPi;
  const Eigen::ArrayXXd kk = wavenumber_sq(k) * (kPi * kPi);
  const Eigen::ArrayXXd psi = (kk > 0).select(-c / (kk > 0).select(kk, 1.0), 0.0);

  const Eigen::ArrayXXd u1 = psi.rowwise() * kv.transpose();
  const Eigen::ArrayXXd u2 = -(psi.colwise() * kv);
  const Eigen::ArrayXXd w1 = c.colwise() * kv;
  const Eigen::ArrayXXd w2 = c.rowwise() * kv.transpose();

  const int m = n_ - 1;
  const Eigen::ArrayXXd U1 = transforms::synthesize(u1, Basis::Sine, Basis::Cosine, n_).middleCols(1, m);
  const Eigen::ArrayXXd U2 = transforms::synthesize(u2, Basis::Cosine, Basis::Sine, n_).middleRows(1, m);
  const Eigen::ArrayXXd W1 = transforms::synthesize(w1, Basis::Cosine, Basis::Sine, n_).middleRows(1, m);
  const Eigen::ArrayXXd W2 = transforms::synthesize(w2, Basis::Sine, Basis::Cosine, n_).middleCols(1, m);

  const Eigen::ArrayXXd product = -(U1 * W1 + U2 * W2);
  const Eigen::ArrayXXd full = transforms::analyze_sine_sine(product, n_);
  Eigen::ArrayXXd out = full.topLeftCorner(k + 1, k + 1);
  if (dealias_fraction) {
    const double total = full.square().sum();
    const double kept = out.square().sum();
    *dealias_fraction = total > 0.0 ? std::sqrt(std::max(0.0, total - kept) / total) : 0.0;
  }
  return out;
}

EvolutionState EulerSolver::step(const EvolutionState& s, double dt) const {
  const double limit = cfl_limit(s);
  if (std::abs(dt) > limit * (1.0 + 1e-12)) {
    throw CflError("time step " + fmt(dt) + " exceeds CFL limit " + fmt(limit));
  }
  const Eigen::ArrayXXd& c = s.omega.coeffs();
  double frac = 0.0;
  const Eigen::ArrayXXd k1 = advection(c, &frac);
  const Eigen::ArrayXXd k2 = advection(rk_combine(c, k1, 0.5 * dt));
  const Eigen::ArrayXXd k3 = advection(rk_combine(c, k2, 0.5 * dt));
  const Eigen::ArrayXXd k4 = advection(rk_combine(c, k3, dt));

  EvolutionState out;
  out.t = s.t + dt;
  out.omega = SpectralField(c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), Parity::OddOdd);
  out.u = velocity_spectral(out.omega);
  out.velocity_sup = velocity_sup(out.u);
  out.steps = s.steps + 1;
  out.last.dt = dt;
  out.last.cfl_number = std::abs(dt) * s.velocity_sup / spacing();
  out.last.dealias_fraction = frac;
  return out;
}

MonitorRecord Monitors::measure(const EulerSolver& solver, const EvolutionState& s) const {
  MonitorRecord r;
  r.t = s.t;
  const Eigen::ArrayXXd v = solver.interior_values(s.omega);
  r.sup_norm = v.abs().maxCoeff();
  const double n = solver.n();
  r.area_above_half = static_cast<double>((v > 0.5).count()) / (n * n);
  r.energy = energy(s.omega);
  r.enstrophy = enstrophy(s.omega);

  const int k = s.omega.cutoff();
  const int edge = static_cast<int>(std::floor(0.9 * k));
  const Eigen::ArrayXXd c2 = s.omega.coeffs().square();
  const double total = c2.sum();
  const double inner = c2.topLeftCorner(edge + 1, edge + 1).sum();
  r.spectral_tail = total > 0.0 ? std::sqrt(std::max(0.0, total - inner) / total) : 0.0;

  for (int q = 0; q <= 64; ++q) {
    const double y = q / 64.0;
    r.axis_max = std::max({r.axis_max, std::abs(s.omega(0.0, y)), std::abs(s.omega(y, 0.0))});
  }
  r.dt = s.last.dt;
  r.cfl_number = s.last.cfl_number;
  r.dealias_fraction = s.last.dealias_fraction;
  return r;
}

std::string Monitors::check(const MonitorRecord& ref, const MonitorRecord& now) const {
  auto rel = [](double a, double b) { return b != 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a); };
  const MonitorThresholds& th = thresholds;
  std::ostringstream why;
  if (!std::isfinite(now.sup_norm) || !std::isfinite(now.energy)) why << "non-finite vorticity";
  else if (now.axis_max > th.axis_tolerance * std::max(ref.sup_norm, 1e-300)) why << "nonzero axis values";
  else if (rel(now.sup_norm, ref.sup_norm) > th.sup_drift) why << "sup-norm drift " << rel(now.sup_norm, ref.sup_norm);
  else if (rel(now.energy, ref.energy) > th.energy_drift) why << "energy drift " << rel(now.energy, ref.energy);
  else if (rel(now.enstrophy, ref.enstrophy) > th.enstrophy_drift)
    why << "enstrophy drift " << rel(now.enstrophy, ref.enstrophy);
  else if (std::abs(now.area_above_half - ref.area_above_half) > th.area_drift)
    why << "distribution drift " << std::abs(now.area_above_half - ref.area_above_half);
  else if (now.spectral_tail > th.spectral_tail) why << "spectral tail " << now.spectral_tail;
  return why.str();
}

RunResult run(const EulerSolver& solver, EvolutionState state, const RunOptions& opt) {
  RunResult res;
  const Monitors& mon = opt.monitors;
  res.series.push_back(mon.measure(solver, state));
  const MonitorRecord reference = res.series.front();

  const double t0 = state.t;
  const double span = opt.horizon - t0;
  const double dir = span >= 0.0 ? 1.0 : -1.0;
  const int records = std::max(1, opt.records);
  const double eps = 1e-12 * std::max(1.0, std::abs(opt.horizon));
  int next = 1;

  while (dir * (opt.horizon - state.t) > eps) {
    const double target = next >= records ? opt.horizon : t0 + span * next / records;
    double h = std::min(solver.cfl_limit(state), std::abs(target - state.t));
    if (opt.max_dt > 0.0) h = std::min(h, opt.max_dt);

    EvolutionState trial = solver.step(state, dir * h);
    for (int halvings = 0; halvings < opt.max_halvings; ++halvings) {
      const double budget = std::abs(h / span);
      const double de = std::abs(energy(trial.omega) - energy(state.omega)) / std::max(reference.energy, 1e-300);
      const double dz =
          std::abs(enstrophy(trial.omega) - enstrophy(state.omega)) / std::max(reference.enstrophy, 1e-300);
      if (de <= mon.thresholds.energy_drift * budget && dz <= mon.thresholds.enstrophy_drift * budget) break;
      h *= 0.5;
      trial = solver.step(state, dir * h);
    }
    state = std::move(trial);
    if (std::abs(target - state.t) <= eps) state.t = target;

    if (opt.observer && !opt.observer(state)) {
      res.stopped_by_observer = true;
      res.series.push_back(mon.measure(solver, state));
      break;
    }
    if (state.t == target) {
      ++next;
      res.series.push_back(mon.measure(solver, state));
      const std::string why = mon.check(reference, res.series.back());
      if (!why.empty() && !res.breached) {
        res.breached = true;
        res.breach_reason = why;
        res.breach_time = state.t;
        if (opt.stop_on_breach) break;
      }
    }
  }
  res.final = std::move(state);
  return res;
}

// ---------------------------------------------------------------------------

Trajectory trace(const VelocitySource& src, const Point& x0, double horizon, const SubdomainBox& box, double dt,
                 double t0) {
  if (!(x0[0] > 0.0 && x0[0] < 1.0 && x0[1] > 0.0 && x0[1] < 1.0)) {
    throw DomainError("trajectory start must lie in (0,1)^2");
  }
  if (!(dt > 0.0)) throw ParameterError("trajectory step must be positive");
  Trajectory traj;
  traj.horizon = t0 + horizon;
  auto f = [&](double t, const Point& x) { return src.velocity(t, x); };
  auto sample = [&](double t, const Point& x) { traj.samples.push_back({t, x, f(t, x), src.vorticity(t, x)}); };

  Point x = x0;
  double t = t0;
  sample(t, x);
  const double end = t0 + horizon;
  while (t < end - 1e-14 * std::max(1.0, std::abs(end))) {
    const double h = std::min(dt, end - t);
    const Point y = rk4_point(f, t, x, h);
    if (outside(box, y)) {
      const auto [theta, xe] = bisect_exit(f, t, x, h, box);
      traj.exit_time = t + theta * h;
      traj.exit_edge = exit_edge_of(box, xe);
      sample(t + theta * h, xe);
      break;
    }
    t = (end - t - h) <= 0.0 ? end : t + h;
    x = y;
    sample(t, x);
    if (x[0] <= 0.0 || x[1] <= 0.0) {
      traj.hit_axis = true;
      break;
    }
  }
  return traj;
}

SynchronizedTracer::SynchronizedTracer(const Point& x0, double horizon, const SubdomainBox& box)
    : box_(box), x_(x0) {
  if (!(x0[0] > 0.0 && x0[0] < 1.0 && x0[1] > 0.0 && x0[1] < 1.0)) {
    throw DomainError("trajectory start must lie in (0,1)^2");
  }
  traj_.horizon = horizon;
}

void SynchronizedTracer::resume(Trajectory traj) {
  traj_ = std::move(traj);
  snaps_.clear();
  if (!traj_.samples.empty()) x_ = traj_.samples.back().x;
  active_ = !traj_.exit_time && !traj_.hit_axis &&
            (traj_.samples.empty() || traj_.samples.back().t < traj_.horizon);
}

// Lagrange weight of snapshot i at time t.
double SynchronizedTracer::weight(size_t i, double t) const {
  double w = 1.0;
  for (size_t j = 0; j < snaps_.size(); ++j) {
    if (j != i) w *= (t - snaps_[j].t) / (snaps_[i].t - snaps_[j].t);
  }
  return w;
}

Vec2 SynchronizedTracer::interpolated(double t, const Point& x) const {
  Vec2 u = Vec2::Zero();
  for (size_t i = 0; i < snaps_.size(); ++i) {
    if (const double w = weight(i, t); w != 0.0) u += w * snaps_[i].u(x);
  }
  return u;
}

double SynchronizedTracer::interpolated_omega(double t, const Point& x) const {
  double v = 0.0;
  for (size_t i = 0; i < snaps_.size(); ++i) {
    if (const double w = weight(i, t); w != 0.0) v += w * snaps_[i].omega(x);
  }
  return v;
}

void SynchronizedTracer::observe(const EvolutionState& s) {
  if (!active_) return;
  snaps_.push_back({s.t, s.u, s.omega});
  if (snaps_.size() > 3) snaps_.pop_front();
  if (snaps_.size() == 1) {
    if (traj_.samples.empty()) traj_.samples.push_back({s.t, x_, s.u(x_), s.omega(x_)});
    return;
  }
  const double ta = snaps_[snaps_.size() - 2].t;
  const double tb = snaps_.back().t;
  auto f = [&](double t, const Point& x) { return interpolated(t, x); };
  auto sample = [&](double t, const Point& x) {
    traj_.samples.push_back({t, x, interpolated(t, x), interpolated_omega(t, x)});
  };

  const double te = std::min(tb, traj_.horizon);
  const double dt = te - ta;
  if (dt <= 0.0) {
    active_ = false;
    return;
  }
  const Point y = rk4_point(f, ta, x_, dt);
  if (outside(box_, y)) {
    const auto [theta, xe] = bisect_exit(f, ta, x_, dt, box_);
    sample(ta + theta * dt, xe);
    traj_.exit_time = ta + theta * dt;
    traj_.exit_edge = exit_edge_of(box_, xe);
    active_ = false;
    return;
  }
  x_ = y;
  sample(te, x_);
  if (x_[0] <= 0.0 || x_[1] <= 0.0) {
    traj_.hit_axis = true;
    active_ = false;
  }
  if (te >= traj_.horizon) active_ = false;
}

std::vector<double> vorticity_along(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) out.push_back(s.omega);
  return out;
}

double transport_drift(const Trajectory& traj, double omega0_at_start) {
  double d = 0.0;
  for (const auto& s : traj.samples) d = std::max(d, std::abs(s.omega - omega0_at_start));
  return omega0_at_start != 0.0 ? d / std::abs(omega0_at_start) : d;
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, const std::string& hash) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# config_hash=" << (hash.empty() ? "-" : hash) << "\n";
  out << "# horizon=" << fmt(traj.horizon) << "\n";
  out << "# exit_time=" << (traj.exit_time ? fmt(*traj.exit_time) : "none") << "\n";
  out << "# exit_edge=" << traj.exit_edge << "\n";
  out << "# hit_axis=" << (traj.hit_axis ? 1 : 0) << "\n";
  out << "t,x1,x2,u1,u2,omega\n";
  for (const auto& s : traj.samples) {
    out << fmt(s.t) << ',' << fmt(s.x[0]) << ',' << fmt(s.x[1]) << ',' << fmt(s.u[0]) << ',' << fmt(s.u[1])
        << ',' << fmt(s.omega) << '\n';
  }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  Trajectory traj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), val = line.substr(eq + 1);
      if (key == "horizon") traj.horizon = std::stod(val);
      else if (key == "exit_time" && val != "none") traj.exit_time = std::stod(val);
      else if (key == "exit_edge") traj.exit_edge = std::stoi(val);
      else if (key == "hit_axis") traj.hit_axis = val == "1";
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;
    std::istringstream row(line);
    TrajectorySample s;
    char comma;
    row >> s.t >> comma >> s.x[0] >> comma >> s.x[1] >> comma >> s.u[0] >> comma >> s.u[1] >> comma >> s.omega;
    if (!row) throw Error("malformed trajectory row in " + path.string());
    traj.samples.push_back(s);
  }
  return traj;
}

void write_checkpoint(const std::filesystem::path& stem, const EulerSolver& solver, const EvolutionState& s,
                      const Trajectory& traj, const std::string& hash) {
  write_snapshot(stem.string() + ".snap", s.omega, s.t, hash,
                 {{"steps", std::to_string(s.steps)}, {"grid", std::to_string(solver.n())}});
  write_trajectory_csv(stem.string() + ".traj.csv", traj, hash);
}

Checkpoint read_checkpoint(const std::filesystem::path& stem, const EulerSolver& solver,
                           const std::string& expected_hash) {
  const Snapshot snap = read_snapshot(stem.string() + ".snap");
  if (!expected_hash.empty() && snap.config_hash != expected_hash) {
    throw ConfigError("checkpoint was written by a different configuration (" + snap.config_hash + ")");
  }
  Checkpoint cp;
  cp.config_hash = snap.config_hash;
  cp.state = solver.initial_state(snapshot_field(snap), snap.time);
  if (auto it = snap.extra.find("steps"); it != snap.extra.end()) cp.state.steps = std::stol(it->second);
  const std::filesystem::path traj = stem.string() + ".traj.csv";
  if (std::filesystem::exists(traj)) cp.trajectory = read_trajectory_csv(traj);
  return cp;
}

}  // namespace oddflow
