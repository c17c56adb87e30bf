#pragma once

// Config-driven runs of the two blow-up scenarios: builds the datum,
// evolves it, traces the corner particle, samples diagnostics on a
// schedule, writes the series/summary/snapshot files and scores each
// inequality of the growth argument against the measurements.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "oddflow/diagnostics.hpp"
#include "oddflow/evolution.hpp"
#include "oddflow/initial_data.hpp"

namespace oddflow {

struct CustomMode {
  int k1 = 1, k2 = 1;
  double amplitude = 1.0;
};

enum class HorizonPolicy { Full, Exit };

struct ScenarioConfig {
  DataKind scenario = DataKind::PartI;
  double alpha = 0.5;
  std::optional<double> delta;  // unset: largest value allowed by c_assumed
  double A = 1.0;
  std::optional<double> a;      // unset: closed form from c_assumed
  double c_assumed = 1.0;
  std::optional<double> T;      // unset: T0
  int N = 256;
  int cutoff = 0;
  double cfl = 0.5;
  double max_dt = 0.0;
  double box_exponent = 1.0;    // corner box [0, exp(-box_exponent A T)]^2
  HorizonPolicy horizon = HorizonPolicy::Full;
  int records = 100;
  int probe_every = 10;         // key integral and B_j on every k-th record
  double transient_fraction = 0.1;
  double min_cells = 1.0;       // X(0) components must span this many grid cells
  double transport_tolerance = 0.01;
  double axis_threshold = 1e-6; // part (ii) axis-derivative residual, relative to ||w||_inf
  MonitorThresholds monitors;
  bool stop_on_breach = true;
  std::vector<CustomMode> modes;   // custom scenario datum
  std::optional<Point> x0;         // custom scenario start point
  std::optional<double> box_side;  // custom scenario box
  std::filesystem::path output_dir = "oddflow-out";
  std::string prefix = "run";
  bool write_files = true;
  std::uint64_t seed = 1;

  /// Strict parse: unknown keys and wrong types throw ConfigError.
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Hash of the canonical JSON form (output location excluded).
  std::string hash() const;
};

/// Parameters after applying the closed forms and defaults.
struct ResolvedParameters {
  double alpha, delta, A, a, T0, T, box_side;
  Point x0;
};

/// a = (2A+C)/((1-alpha)A) for part (i), (5A+2C)/(2A) for part (ii).
double a_formula(DataKind kind, double A, double C, double alpha);
/// Largest admissible delta: exp(-C(a-1)A - C^2) for part (i),
/// exp(-C(2a-2)A - C^2) for part (ii); capped at 0.1.
double delta_formula(DataKind kind, double A, double C, double a);

/// Throws ConfigError on invalid combinations, before any computation.
ResolvedParameters resolve(const ScenarioConfig& cfg);

enum class Verdict { Holds, Fails, Untestable };
std::string_view to_string(Verdict v);

struct ScoreEntry {
  std::string name;
  Verdict verdict = Verdict::Untestable;
  double measured = 0.0;
  double bound = 0.0;
  std::string note;
};

struct RunSummary {
  std::string config_hash;
  ResolvedParameters params{};
  double final_t = 0.0;
  double t_prime = 0.0;
  std::optional<double> t_star;
  int exit_edge = 0;
  std::optional<GrowthFit> grad_fit, hessian_fit;
  std::string grad_fit_error, hessian_fit_error;
  double c_logsum = 0.0;       // sup |u1/X1 + u2/X2|
  double logsum_part = 0.0;    // sup max(|u1/X1|, |u2/X2|)
  double c_bj = 0.0;           // max |B_j| / (||w||_inf bracket) over probes
  double key_over_log = 0.0;   // min k(t) / |log delta| over probes
  double key_integral_delta = 0.0;  // I((delta, delta)) of the datum
  double transport_drift = 0.0;
  double axis_residual = 0.0;  // final, relative to ||w||_inf
  double grad_assumption_violation = 0.0;  // first t with sup|grad w| > e^{AT} on the box (<0: never)
  bool breached = false;
  std::string breach_reason;
  double breach_time = 0.0;
  bool finite = true;
  std::vector<ScoreEntry> scorecard;
  std::vector<DiagnosticsRecord> records;
  Trajectory trajectory;

  bool ok() const { return !breached && finite; }
  nlohmann::json to_json() const;
};

/// Runs the scenario; writes <prefix>.diagnostics.csv, <prefix>.trajectory.csv,
/// <prefix>.summary.json and <prefix>.t{0,mid,end}.snap when write_files is set.
RunSummary run_scenario(const ScenarioConfig& cfg);

/// Cartesian product of parameter lists applied to a template config.
struct SweepSpec {
  nlohmann::json base;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> grid;
  static SweepSpec from_json(const nlohmann::json& j);
};

struct SweepEntry {
  nlohmann::json overrides;
  std::optional<RunSummary> summary;
  std::string error;
};

/// Independent runs over `threads` workers; a failing run does not stop
/// the others. Writes <prefix>.sweep.csv when the base config writes files.
std::vector<SweepEntry> sweep(const SweepSpec& spec, int threads = 1);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Property suites: "symmetry", "oracle", "quadrature" or "all".
std::vector<CheckResult> verify(const std::string& suite, std::uint64_t seed = 1);

}  // namespace oddflow
