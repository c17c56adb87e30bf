#pragma once

// Time evolution of the vorticity equation  w_t + u . grad w = 0  in the
// odd-odd class, and particle paths X' = u(t, X).
//
// The field is advanced pseudo-spectrally: products are formed at the
// interior grid nodes, transformed back with a sine-sine analysis and
// truncated to wavenumbers k < 2N/3, so the truncation is exactly the
// Galerkin projection of the quadratic term.

#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oddflow/biot_savart.hpp"
#include "oddflow/field.hpp"

namespace oddflow {

struct StepStats {
  double dt = 0.0;
  double cfl_number = 0.0;        // |dt| * ||u||_inf / h
  double dealias_fraction = 0.0;  // L2 share of the advection term above the cutoff
};

struct EvolutionState {
  double t = 0.0;
  SpectralField omega;
  VelocityField u;
  double velocity_sup = 0.0;  // nodal max of |u|
  long steps = 0;
  StepStats last;
};

/// Energy 1/2 int |u|^2 and enstrophy int w^2 over the quadrant.
double energy(const SpectralField& omega);
double enstrophy(const SpectralField& omega);

class EulerSolver {
 public:
  /// Grid size N; cutoff defaults to the 2/3 rule, ceil(2N/3) - 1.
  explicit EulerSolver(int n, int cutoff = 0, double cfl = 0.5);

  int n() const { return n_; }
  int cutoff() const { return cutoff_; }
  double cfl() const { return cfl_; }
  double spacing() const { return 1.0 / n_; }
  static int dealiased_cutoff(int n);

  EvolutionState initial_state(const SpectralField& omega0, double t0 = 0.0) const;

  /// Largest admissible |dt| for the state.
  double cfl_limit(const EvolutionState& s) const;

  /// One classical RK4 step; dt may be negative (backward in time).
  /// Throws CflError if |dt| exceeds cfl_limit(s).
  EvolutionState step(const EvolutionState& s, double dt) const;

  /// Spectral coefficients of -u . grad w, truncated to the cutoff.
  Eigen::ArrayXXd advection(const Eigen::ArrayXXd& coeffs, double* dealias_fraction = nullptr) const;

  /// Nodal values at the interior nodes (i/N, j/N), i,j = 1..N-1.
  Eigen::ArrayXXd interior_values(const SpectralField& f) const;

  /// Nodal max of |u| (upper bound sqrt(max u1^2 + max u2^2)).
  double velocity_sup(const VelocityField& u) const;

 private:
  int n_;
  int cutoff_;
  double cfl_;
};

struct MonitorThresholds {
  double sup_drift = 1e-3;        // relative drift of ||w||_inf
  double energy_drift = 1e-6;     // relative
  double enstrophy_drift = 1e-6;  // relative
  double area_drift = 0.02;       // absolute drift of area{w > 1/2} on the quadrant
  double spectral_tail = 1e-3;    // L2 share of the outer tenth of retained wavenumbers
  double axis_tolerance = 1e-12;  // |w| on the axes relative to ||w||_inf
};

struct MonitorRecord {
  double t = 0.0;
  double sup_norm = 0.0;
  double energy = 0.0;
  double enstrophy = 0.0;
  double area_above_half = 0.0;
  double spectral_tail = 0.0;
  double axis_max = 0.0;
  double dt = 0.0;
  double cfl_number = 0.0;
  double dealias_fraction = 0.0;
};

struct Monitors {
  MonitorThresholds thresholds;

  MonitorRecord measure(const EulerSolver& solver, const EvolutionState& s) const;
  /// Empty if within thresholds, else a description of the first breach.
  std::string check(const MonitorRecord& reference, const MonitorRecord& now) const;
};

struct RunOptions {
  double horizon = 1.0;      // target time (may be below the start time for backward runs)
  int records = 100;         // monitor records at equal time spacing (plus t = start)
  double max_dt = 0.0;       // cap on |dt| besides the CFL limit (0: none)
  int max_halvings = 4;      // dt halvings when a single step changes energy/enstrophy too much
  bool stop_on_breach = true;
  Monitors monitors;
  /// Called after every step; returning false ends the run.
  std::function<bool(const EvolutionState&)> observer;
};

struct RunResult {
  EvolutionState final;
  std::vector<MonitorRecord> series;
  bool breached = false;
  std::string breach_reason;
  double breach_time = 0.0;
  bool stopped_by_observer = false;
};

RunResult run(const EulerSolver& solver, EvolutionState state, const RunOptions& options);

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectorySample {
  double t = 0.0;
  Point x = Point::Zero();
  Vec2 u = Vec2::Zero();
  double omega = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double horizon = 0.0;                // T
  std::optional<double> exit_time;     // T*
  int exit_edge = 0;                   // 1: x1 = side, 2: x2 = side, 0: none
  bool hit_axis = false;

  double effective_horizon() const { return exit_time ? std::min(horizon, *exit_time) : horizon; }
};

/// Time-dependent velocity (and optionally vorticity) at a point.
class VelocitySource {
 public:
  virtual ~VelocitySource() = default;
  virtual Vec2 velocity(double t, const Point& x) const = 0;
  virtual double vorticity(double, const Point&) const { return 0.0; }
};

class FunctionVelocity final : public VelocitySource {
 public:
  using Fn = std::function<Vec2(double, const Point&)>;
  explicit FunctionVelocity(Fn fn, std::function<double(double, const Point&)> w = {})
      : fn_(std::move(fn)), w_(std::move(w)) {}
  Vec2 velocity(double t, const Point& x) const override { return fn_(t, x); }
  double vorticity(double t, const Point& x) const override { return w_ ? w_(t, x) : 0.0; }

 private:
  Fn fn_;
  std::function<double(double, const Point&)> w_;
};

/// RK4 path of X' = u(t, X) from X0 at t0 with fixed step dt up to t0 +
/// horizon (times in the result are absolute), stopping at the first exit from `box` (located by bisection)
/// or when a coordinate reaches an axis.
Trajectory trace(const VelocitySource& source, const Point& x0, double horizon, const SubdomainBox& box,
                 double dt, double t0 = 0.0);

/// Traces a particle alongside an evolving field. Each observed state is a
/// velocity snapshot; the path is advanced over the step between the last
/// two snapshots with RK4, the velocity at intermediate times being
/// interpolated quadratically in time through the last three snapshots.
class SynchronizedTracer {
 public:
  SynchronizedTracer(const Point& x0, double horizon, const SubdomainBox& box);

  /// Feeds the next field state (times must be monotone).
  void observe(const EvolutionState& s);
  bool active() const { return active_; }
  const Trajectory& trajectory() const { return traj_; }

  /// Restores a path read from a checkpoint; tracing continues from its
  /// last sample when the next state is observed.
  void resume(Trajectory traj);

 private:
  struct Snap {
    double t;
    VelocityField u;
    SpectralField omega;
  };
  double weight(size_t i, double t) const;
  Vec2 interpolated(double t, const Point& x) const;
  double interpolated_omega(double t, const Point& x) const;

  std::deque<Snap> snaps_;
  Trajectory traj_;
  SubdomainBox box_;
  Point x_;
  bool active_ = true;
};

/// w(t, X(t)) along the path.
std::vector<double> vorticity_along(const Trajectory& traj);

/// max_t |w(t,X(t)) - w0(X(0))| / |w0(X(0))|.
double transport_drift(const Trajectory& traj, double omega0_at_start);

// ---------------------------------------------------------------------------
// Checkpoints: field snapshot, trajectory CSV and the config hash.

struct Checkpoint {
  EvolutionState state;
  Trajectory trajectory;
  std::string config_hash;
};

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::string& config_hash);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Writes <stem>.snap and <stem>.traj.csv.
void write_checkpoint(const std::filesystem::path& stem, const EulerSolver& solver,
                      const EvolutionState& s, const Trajectory& traj, const std::string& config_hash);
/// Restores a checkpoint; throws ConfigError if the stored hash differs
/// from `expected_hash` (unless that is empty).
Checkpoint read_checkpoint(const std::filesystem::path& stem, const EulerSolver& solver,
                           const std::string& expected_hash = {});

}  // namespace oddflow
