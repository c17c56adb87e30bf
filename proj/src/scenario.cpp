#include "oddflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "oddflow/biot_savart.hpp"
#include "oddflow/snapshot.hpp"

namespace oddflow {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  out = v;
}

json thresholds_json(const MonitorThresholds& m) {
  return {{"sup_drift", m.sup_drift},         {"energy_drift", m.energy_drift},
          {"enstrophy_drift", m.enstrophy_drift}, {"area_drift", m.area_drift},
          {"spectral_tail", m.spectral_tail}, {"axis_tolerance", m.axis_tolerance}};
}

SpectralField make_datum(const ScenarioConfig& cfg, const ResolvedParameters& p, int n, int cutoff) {
  if (cfg.scenario == DataKind::Custom) {
    Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(cutoff + 1, cutoff + 1);
    for (const CustomMode& m : cfg.modes) c(m.k1, m.k2) += m.amplitude;
    return SpectralField(std::move(c), Parity::OddOdd);
  }
  InitialDataSpec spec;
  spec.kind = cfg.scenario;
  spec.alpha = p.alpha;
  spec.delta = p.delta;
  return InitialData(spec).spectral(n, cutoff).field;
}

// Advances a stored field from time t to `target` with CFL-limited steps.
SpectralField evolve_to(const EulerSolver& solver, const SpectralField& w, double t, double target) {
  EvolutionState s = solver.initial_state(w, t);
  while (target - s.t > 1e-14 * std::max(1.0, target)) {
    s = solver.step(s, std::min(solver.cfl_limit(s), target - s.t));
  }
  return s.omega;
}

bool all_finite(const DiagnosticsRecord& r) {
  const MonitorRecord& m = r.monitors;
  return std::isfinite(m.sup_norm) && std::isfinite(m.energy) && std::isfinite(m.enstrophy) &&
         std::isfinite(r.grad.value) && std::isfinite(r.hessian.value);
}

ScoreEntry entry(std::string name, Verdict v, double measured, double bound, std::string note) {
  return {std::move(name), v, measured, bound, std::move(note)};
}

std::vector<ScoreEntry> score(const ScenarioConfig& cfg, const ResolvedParameters& p, const RunSummary& s,
                              double omega0_x0) {
  std::vector<ScoreEntry> card;
  const Trajectory& traj = s.trajectory;
  const double A = p.A, a = p.a, T = p.T;
  const double c_emp = s.c_logsum;
  const bool traced = traj.samples.size() >= 2;

  if (!traced || omega0_x0 == 0.0) {
    card.push_back(entry("transport_identity", Verdict::Untestable, s.transport_drift, cfg.transport_tolerance,
                         "fewer than two path samples or zero initial value"));
  } else {
    card.push_back(entry("transport_identity",
                         s.transport_drift <= cfg.transport_tolerance ? Verdict::Holds : Verdict::Fails,
                         s.transport_drift, cfg.transport_tolerance, "max relative drift of w(t,X(t))"));
  }

  double max_rate1 = -std::numeric_limits<double>::infinity();
  double min_rate2 = std::numeric_limits<double>::infinity();
  for (const TrajectorySample& q : traj.samples) {
    if (!(q.x[0] > 0.0 && q.x[1] > 0.0)) continue;
    max_rate1 = std::max(max_rate1, q.u[0] / q.x[0]);
    min_rate2 = std::min(min_rate2, q.u[1] / q.x[1]);
  }
  if (!traced) {
    card.push_back(entry("hyperbolic_contraction_x1", Verdict::Untestable, kNaN, 0.0, "no path samples"));
    card.push_back(entry("hyperbolic_expansion_x2", Verdict::Untestable, kNaN, 0.0, "no path samples"));
  } else {
    card.push_back(entry("hyperbolic_contraction_x1", max_rate1 < 0.0 ? Verdict::Holds : Verdict::Fails, max_rate1,
                         0.0, "max u1/X1 over samples inside the box"));
    card.push_back(entry("hyperbolic_expansion_x2", min_rate2 > 0.0 ? Verdict::Holds : Verdict::Fails, min_rate2,
                         0.0, "min u2/X2 over samples inside the box"));
  }

  card.push_back(entry("logsum_drift_bound",
                       !traced ? Verdict::Untestable
                               : (c_emp <= cfg.c_assumed ? Verdict::Holds : Verdict::Fails),
                       c_emp, cfg.c_assumed, "sup |u1/X1 + u2/X2| against the assumed constant"));

  const bool exited = traj.exit_time.has_value();
  const TrajectorySample* last = traced ? &traj.samples.back() : nullptr;
  if (!exited) {
    const std::string why = "path did not leave the box";
    card.push_back(entry("exit_log_bound", Verdict::Untestable, kNaN, kNaN, why));
    card.push_back(entry("transport_lower_bound", Verdict::Untestable, kNaN, kNaN,
                         cfg.scenario == DataKind::PartII ? why : "stated for the part_ii datum"));
    card.push_back(entry("slope_lower_bound", Verdict::Untestable, kNaN, kNaN, why));
    if (cfg.scenario == DataKind::PartII && traced) {
      double wmin = std::numeric_limits<double>::infinity();
      for (const auto& q : traj.samples) wmin = std::min(wmin, q.omega);
      const double bound = std::exp(-(2 * a + 2) * A * T);
      card[5] = entry("transport_lower_bound", wmin >= bound ? Verdict::Holds : Verdict::Fails, wmin, bound,
                      "min w(t,X(t)) over the traced interval");
    }
    return card;
  }

  const double tp = *traj.exit_time;
  const double log_x1 = std::log(last->x[0]);
  const Point x0 = traj.samples.front().x;
  const double generic = std::log(x0[0]) + std::log(x0[1]) - std::log(last->x[1]) + c_emp * tp;
  double bound = generic;
  std::string note = "exit through edge " + std::to_string(traj.exit_edge) + " at t = " + fmt(tp);
  if (cfg.scenario != DataKind::Custom) {
    bound = (-2 * a * A + A + c_emp) * T;
    note += "; log-sum integral bound " + fmt(generic);
  }
  card.push_back(entry("exit_log_bound", log_x1 <= bound ? Verdict::Holds : Verdict::Fails, log_x1, bound, note));

  if (cfg.scenario == DataKind::PartII) {
    double wmin = std::numeric_limits<double>::infinity();
    for (const auto& q : traj.samples) wmin = std::min(wmin, q.omega);
    const double lb = std::exp(-(2 * a + 2) * A * T);
    card.push_back(entry("transport_lower_bound", wmin >= lb ? Verdict::Holds : Verdict::Fails, wmin, lb,
                         "min w(t,X(t)) over the traced interval"));
  } else {
    card.push_back(entry("transport_lower_bound", Verdict::Untestable, kNaN, kNaN, "stated for the part_ii datum"));
  }

  const double slope = last->omega > 0.0 ? std::log(last->omega / last->x[0]) : -std::numeric_limits<double>::infinity();
  if (cfg.scenario == DataKind::Custom) {
    card.push_back(entry("slope_lower_bound", Verdict::Untestable, slope, kNaN, "no closed-form bound for custom data"));
  } else {
    const double lb = cfg.scenario == DataKind::PartI ? (a * (1 - p.alpha) * A - A - c_emp) * T
                                                      : -(3 * A + c_emp) * T;
    card.push_back(entry("slope_lower_bound", slope >= lb ? Verdict::Holds : Verdict::Fails, slope, lb,
                         "log(w(T',X(T'))/X1(T'))"));
  }
  return card;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"scenario", "alpha", "delta", "A", "a", "c_assumed", "T", "N", "cutoff", "cfl", "max_dt",
                  "box_exponent", "horizon", "records", "probe_every", "transient_fraction", "min_cells",
                  "transport_tolerance", "axis_threshold", "monitors", "stop_on_breach", "custom", "output", "seed"},
                 "config");
  ScenarioConfig c;
  std::string kind = "part_i";
  read(j, "scenario", kind);
  try {
    c.scenario = data_kind_from_string(kind);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  read(j, "alpha", c.alpha);
  read(j, "delta", c.delta);
  read(j, "A", c.A);
  read(j, "a", c.a);
  read(j, "c_assumed", c.c_assumed);
  read(j, "T", c.T);
  read(j, "N", c.N);
  read(j, "cutoff", c.cutoff);
  read(j, "cfl", c.cfl);
  read(j, "max_dt", c.max_dt);
  read(j, "box_exponent", c.box_exponent);
  std::string horizon = "full";
  read(j, "horizon", horizon);
  if (horizon == "full") c.horizon = HorizonPolicy::Full;
  else if (horizon == "exit") c.horizon = HorizonPolicy::Exit;
  else throw ConfigError("config key 'horizon' must be \"full\" or \"exit\"");
  read(j, "records", c.records);
  read(j, "probe_every", c.probe_every);
  read(j, "transient_fraction", c.transient_fraction);
  read(j, "min_cells", c.min_cells);
  read(j, "transport_tolerance", c.transport_tolerance);
  read(j, "axis_threshold", c.axis_threshold);
  read(j, "stop_on_breach", c.stop_on_breach);
  read(j, "seed", c.seed);
  if (j.contains("monitors")) {
    const json& m = j.at("monitors");
    reject_unknown(m, {"sup_drift", "energy_drift", "enstrophy_drift", "area_drift", "spectral_tail", "axis_tolerance"},
                   "monitors");
    read(m, "sup_drift", c.monitors.sup_drift);
    read(m, "energy_drift", c.monitors.energy_drift);
    read(m, "enstrophy_drift", c.monitors.enstrophy_drift);
    read(m, "area_drift", c.monitors.area_drift);
    read(m, "spectral_tail", c.monitors.spectral_tail);
    read(m, "axis_tolerance", c.monitors.axis_tolerance);
  }
  if (j.contains("custom")) {
    const json& cu = j.at("custom");
    reject_unknown(cu, {"modes", "x0", "box_side"}, "custom");
    if (cu.contains("modes")) {
      for (const json& m : cu.at("modes")) {
        if (!m.is_array() || m.size() != 3) throw ConfigError("custom.modes entries are [k1, k2, amplitude]");
        c.modes.push_back({m[0].get<int>(), m[1].get<int>(), m[2].get<double>()});
      }
    }
    if (cu.contains("x0")) {
      const json& x = cu.at("x0");
      if (!x.is_array() || x.size() != 2) throw ConfigError("custom.x0 must be [x1, x2]");
      c.x0 = Point(x[0].get<double>(), x[1].get<double>());
    }
    read(cu, "box_side", c.box_side);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"dir", "prefix", "write_files"}, "output");
    std::string dir = c.output_dir.string();
    read(o, "dir", dir);
    c.output_dir = dir;
    read(o, "prefix", c.prefix);
    read(o, "write_files", c.write_files);
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json ScenarioConfig::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"scenario", to_string(scenario)},
            {"alpha", alpha},
            {"delta", opt(delta)},
            {"A", A},
            {"a", opt(a)},
            {"c_assumed", c_assumed},
            {"T", opt(T)},
            {"N", N},
            {"cutoff", cutoff},
            {"cfl", cfl},
            {"max_dt", max_dt},
            {"box_exponent", box_exponent},
            {"horizon", horizon == HorizonPolicy::Full ? "full" : "exit"},
            {"records", records},
            {"probe_every", probe_every},
            {"transient_fraction", transient_fraction},
            {"min_cells", min_cells},
            {"transport_tolerance", transport_tolerance},
            {"axis_threshold", axis_threshold},
            {"monitors", thresholds_json(monitors)},
            {"stop_on_breach", stop_on_breach},
            {"seed", seed},
            {"output", {{"dir", output_dir.string()}, {"prefix", prefix}, {"write_files", write_files}}}};
  if (scenario == DataKind::Custom) {
    json list = json::array();
    for (const CustomMode& m : modes) list.push_back({m.k1, m.k2, m.amplitude});
    j["custom"] = {{"modes", list},
                   {"x0", x0 ? json{(*x0)[0], (*x0)[1]} : json(nullptr)},
                   {"box_side", opt(box_side)}};
  }
  return j;
}

std::string ScenarioConfig::hash() const {
  json j = to_json();
  j.erase("output");
  return fnv1a_hex(j.dump());
}

double a_formula(DataKind kind, double A, double C, double alpha) {
  if (kind == DataKind::PartII) return (5 * A + 2 * C) / (2 * A);
  return (2 * A + C) / ((1 - alpha) * A);
}

double delta_formula(DataKind kind, double A, double C, double a) {
  const double e = kind == DataKind::PartII ? -C * (2 * a - 2) * A - C * C : -C * (a - 1) * A - C * C;
  return std::min(0.1, std::exp(e));
}

ResolvedParameters resolve(const ScenarioConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(c.N >= 16)) fail("N must be at least 16");
  if (c.cutoff < 0 || c.cutoff >= c.N) fail("cutoff must lie in [0, N)");
  if (!(c.cfl > 0.0 && c.cfl <= 2.0)) fail("cfl must lie in (0, 2]");
  if (!(c.A > 0.0)) fail("A must be positive");
  if (!(c.c_assumed > 0.0)) fail("c_assumed must be positive");
  if (c.records < 2) fail("records must be at least 2");
  if (c.probe_every < 1) fail("probe_every must be at least 1");
  if (!(c.transient_fraction >= 0.0 && c.transient_fraction < 1.0)) fail("transient_fraction must lie in [0, 1)");
  if (!(c.box_exponent > 0.0)) fail("box_exponent must be positive");

  ResolvedParameters p{};
  p.alpha = c.alpha;
  p.A = c.A;
  if (c.scenario == DataKind::Custom) {
    if (c.modes.empty()) fail("custom scenario needs custom.modes");
    const int k = c.cutoff ? c.cutoff : EulerSolver::dealiased_cutoff(c.N);
    for (const CustomMode& m : c.modes) {
      if (m.k1 < 1 || m.k2 < 1 || m.k1 > k || m.k2 > k) fail("custom mode outside 1..cutoff");
    }
    if (!c.x0 || !c.T) fail("custom scenario needs custom.x0 and T");
    p.x0 = *c.x0;
    p.T = *c.T;
    p.T0 = 0.0;
    p.a = c.a.value_or(1.0);
    p.delta = c.delta.value_or(0.1);
    p.box_side = c.box_side.value_or(1.0);
    if (!(p.T > 0.0)) fail("T must be positive");
    if (!(p.box_side > 0.0 && p.box_side <= 1.0)) fail("custom.box_side must lie in (0, 1]");
    if (!(p.x0[0] > 0.0 && p.x0[1] > 0.0 && p.x0[0] <= p.box_side && p.x0[1] <= p.box_side)) {
      fail("custom.x0 must lie in the box (0, box_side]^2");
    }
  } else {
    if (c.scenario == DataKind::PartI && !(c.alpha > 0.0 && c.alpha < 1.0)) fail("alpha must lie in (0, 1)");
    p.a = c.a ? *c.a : a_formula(c.scenario, c.A, c.c_assumed, c.alpha);
    if (!(p.a > 1.0)) fail("a must exceed 1, got " + fmt(p.a));
    p.delta = c.delta ? *c.delta : delta_formula(c.scenario, c.A, c.c_assumed, p.a);
    if (!(p.delta > 0.0 && p.delta <= 0.1)) fail("delta must lie in (0, 0.1], got " + fmt(p.delta));
    p.T0 = c.scenario == DataKind::PartI ? std::abs(std::log(p.delta)) / c.A
                                         : std::abs(std::log(p.delta / 4)) / c.A;
    p.T = c.T ? *c.T : p.T0;
    if (p.T < p.T0 * (1 - 1e-12)) fail("T = " + fmt(p.T) + " is below T0 = " + fmt(p.T0));
    p.box_side = std::exp(-c.box_exponent * c.A * p.T);
    if (c.scenario == DataKind::PartI) {
      const double x = std::exp(-p.a * c.A * p.T);
      p.x0 = Point(x, x);
    } else {
      p.x0 = Point(std::exp(-c.A * p.T), std::exp(-(2 * p.a - 1) * c.A * p.T));
    }
  }
  const double h = 1.0 / c.N;
  const double smallest = std::min(p.x0[0], p.x0[1]);
  if (smallest < c.min_cells * h) {
    const double needed = std::ceil(c.min_cells / smallest);
    fail("X(0) = (" + fmt(p.x0[0]) + ", " + fmt(p.x0[1]) + ") has a component below " + fmt(c.min_cells) +
         " grid cell(s) at N = " + std::to_string(c.N) + "; resolving it needs N >= " + fmt(needed) +
         ", or a smaller A*T or a");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Runs

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Untestable: return "untestable";
  }
  return "untestable";
}

json RunSummary::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json card = json::array();
  for (const ScoreEntry& e : scorecard) {
    card.push_back({{"name", e.name},
                    {"verdict", to_string(e.verdict)},
                    {"measured", num(e.measured)},
                    {"bound", num(e.bound)},
                    {"note", e.note}});
  }
  json fits = json::object();
  fits["grad_sup"] = grad_fit ? oddflow::to_json(*grad_fit) : json{{"error", grad_fit_error}};
  fits["hessian_sup"] = hessian_fit ? oddflow::to_json(*hessian_fit) : json{{"error", hessian_fit_error}};
  return {{"config_hash", config_hash},
          {"parameters",
           {{"alpha", params.alpha},
            {"delta", params.delta},
            {"A", params.A},
            {"a", params.a},
            {"T0", params.T0},
            {"T", params.T},
            {"box_side", params.box_side},
            {"x0", {params.x0[0], params.x0[1]}}}},
          {"final_t", final_t},
          {"t_prime", t_prime},
          {"t_star", t_star ? json(*t_star) : json(nullptr)},
          {"exit_edge", exit_edge},
          {"growth_fits", fits},
          {"empirical_constants",
           {{"logsum_drift", c_logsum},
            {"logsum_part", logsum_part},
            {"bj_ratio", c_bj},
            {"key_over_log_delta", num(key_over_log)}}},
          {"key_integral_delta", num(key_integral_delta)},
          {"transport_drift", transport_drift},
          {"axis_residual", axis_residual},
          {"gradient_assumption_violated_at", grad_assumption_violation >= 0 ? json(grad_assumption_violation) : json(nullptr)},
          {"monitors",
           {{"breached", breached},
            {"reason", breach_reason},
            {"breach_time", breached ? json(breach_time) : json(nullptr)},
            {"finite", finite}}},
          {"scorecard", card},
          {"ok", ok()}};
}

RunSummary run_scenario(const ScenarioConfig& cfg) {
  const ResolvedParameters p = resolve(cfg);
  RunSummary out;
  out.params = p;
  out.config_hash = cfg.hash();

  const EulerSolver solver(cfg.N, cfg.cutoff, cfg.cfl);
  const SpectralField w0 = make_datum(cfg, p, cfg.N, solver.cutoff());
  const EvolutionState s0 = solver.initial_state(w0);
  const SubdomainBox box = SubdomainBox::corner(p.box_side);
  const double omega0_x0 = w0(p.x0);
  const double wsup0 = sup_norm_on(w0, SubdomainBox::unit()).value;
  const Monitors monitors{cfg.monitors};

  SynchronizedTracer tracer(p.x0, p.T, box);
  tracer.observe(s0);

  std::vector<std::pair<double, SpectralField>> history;
  int probe_count = 0;
  auto diagnose = [&](const EvolutionState& s, bool probe) {
    DiagnosticsRecord r;
    r.t = s.t;
    r.monitors = monitors.measure(solver, s);
    r.grad = gradient_sup(s.omega, box);
    r.hessian = hessian_sup(s.omega, box);
    r.axis_residual = axis_derivative_residual(s.omega).value;
    const Trajectory& tr = tracer.trajectory();
    const bool on_path = !tr.samples.empty() && std::abs(tr.samples.back().t - s.t) <= 1e-12 * std::max(1.0, s.t) &&
                         !tr.exit_time;
    if (on_path) {
      const TrajectorySample& q = tr.samples.back();
      r.X1 = q.x[0];
      r.X2 = q.x[1];
      r.u1 = q.u[0];
      r.u2 = q.u[1];
      r.omega_at_X = q.omega;
      r.log_sum = std::log(q.x[0]) + std::log(q.x[1]);
      r.logsum_rate = q.u[0] / q.x[0] + q.u[1] / q.x[1];
    } else {
      r.X1 = r.X2 = r.u1 = r.u2 = r.omega_at_X = r.log_sum = r.logsum_rate = kNaN;
    }
    r.key_integral = r.key_integral_error = r.B1 = r.B2 = r.bracket1 = r.bracket2 = r.M1 = r.M2 = kNaN;
    if (probe && on_path && r.X1 > 0.0 && r.X2 > 0.0 && r.X1 < 0.5 && r.X2 < 0.5) {
      BjOptions bo;
      bo.omega_sup = sup_norm_on(s.omega, SubdomainBox::unit()).value;
      const auto b = bj_residuals(s.omega, s.u, Point(r.X1, r.X2), bo);
      r.key_integral = b[0].key_integral;
      r.key_integral_error = b[0].key_integral_error;
      r.B1 = b[0].B;
      r.B2 = b[1].B;
      r.bracket1 = b[0].bracket;
      r.bracket2 = b[1].bracket;
      r.branch1 = b[0].min_branch_used;
      r.branch2 = b[1].min_branch_used;
      r.M1 = b[0].M;
      r.M2 = b[1].M;
      out.c_bj = std::max({out.c_bj, b[0].ratio(), b[1].ratio()});
      ++probe_count;
    }
    return r;
  };

  out.records.push_back(diagnose(s0, true));
  history.emplace_back(0.0, w0);

  RunOptions opt;
  opt.horizon = p.T;
  opt.records = cfg.records;
  opt.max_dt = cfg.max_dt;
  opt.stop_on_breach = cfg.stop_on_breach;
  opt.monitors = monitors;
  int record = 0;
  bool exit_recorded = false;
  opt.observer = [&](const EvolutionState& s) {
    const bool was_active = tracer.active();
    tracer.observe(s);
    const int k = record + 1;
    const double tk = k >= cfg.records ? p.T : p.T * k / cfg.records;
    const bool at_record = s.t == tk;
    if (at_record) {
      record = k;
      out.records.push_back(diagnose(s, k % cfg.probe_every == 0));
      history.emplace_back(s.t, s.omega);
    }
    if (was_active && !tracer.active() && !exit_recorded) {
      exit_recorded = true;
      if (!at_record) history.emplace_back(s.t, s.omega);
    }
    return !(cfg.horizon == HorizonPolicy::Exit && !tracer.active());
  };

  const RunResult rr = run(solver, s0, opt);
  if (out.records.back().t != rr.final.t) out.records.push_back(diagnose(rr.final, false));

  out.trajectory = tracer.trajectory();
  out.final_t = rr.final.t;
  out.breached = rr.breached;
  out.breach_reason = rr.breach_reason;
  out.breach_time = rr.breach_time;
  out.t_star = out.trajectory.exit_time;
  out.exit_edge = out.trajectory.exit_edge;
  out.t_prime = std::min(out.trajectory.effective_horizon(), out.final_t);

  const LogSumDrift ls = logsum_drift(out.trajectory);
  out.c_logsum = ls.sup_drift;
  out.logsum_part = ls.sup_part;
  out.transport_drift = out.trajectory.samples.size() >= 2 ? transport_drift(out.trajectory, omega0_x0) : 0.0;
  out.axis_residual = out.records.back().axis_residual / std::max(wsup0, 1e-300);
  if (p.delta > 0.0 && p.delta < 0.5 && cfg.scenario != DataKind::Custom) {
    out.key_integral_delta = key_integral(w0, Point(p.delta, p.delta)).value;
  }
  out.key_over_log = kNaN;
  if (probe_count > 0 && cfg.scenario != DataKind::Custom) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : out.records) {
      if (std::isfinite(r.key_integral)) m = std::min(m, r.key_integral);
    }
    out.key_over_log = m / std::abs(std::log(p.delta));
  }
  out.grad_assumption_violation = -1.0;
  for (const auto& r : out.records) {
    out.finite = out.finite && all_finite(r);
    if (out.grad_assumption_violation < 0.0 && r.grad.value > std::exp(p.A * p.T)) out.grad_assumption_violation = r.t;
  }

  std::vector<double> ts, gs, hs;
  for (const auto& r : out.records) {
    ts.push_back(r.t);
    gs.push_back(r.grad.value);
    hs.push_back(r.hessian.value);
  }
  try {
    out.grad_fit = growth_fit(ts, gs, GrowthQuantity::GradSup, cfg.transient_fraction);
  } catch (const FitError& e) {
    out.grad_fit_error = e.what();
  }
  try {
    out.hessian_fit = growth_fit(ts, hs, GrowthQuantity::HessianSup, cfg.transient_fraction);
  } catch (const FitError& e) {
    out.hessian_fit_error = e.what();
  }

  out.scorecard = score(cfg, p, out, omega0_x0);

  if (cfg.write_files) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path base = cfg.output_dir / cfg.prefix;
    write_diagnostics_csv(base.string() + ".diagnostics.csv", out.records, out.config_hash);
    write_trajectory_csv(base.string() + ".trajectory.csv", out.trajectory, out.config_hash);

    auto field_at = [&](double t) {
      auto it = std::upper_bound(history.begin(), history.end(), t,
                                 [](double v, const auto& h) { return v < h.first; });
      if (it != history.begin()) --it;
      return evolve_to(solver, it->second, it->first, t);
    };
    const double t_end = out.t_prime;
    const std::map<std::string, std::string> extra = {{"scenario", std::string(to_string(cfg.scenario))}};
    write_snapshot(base.string() + ".t0.snap", w0, 0.0, out.config_hash, extra);
    write_snapshot(base.string() + ".tmid.snap", field_at(0.5 * t_end), 0.5 * t_end, out.config_hash, extra);
    write_snapshot(base.string() + ".tend.snap",
                   t_end == rr.final.t ? rr.final.omega : field_at(t_end), t_end, out.config_hash, extra);

    json j = out.to_json();
    j["config"] = cfg.to_json();
    std::ofstream(base.string() + ".summary.json") << j.dump(2) << "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepSpec SweepSpec::from_json(const json& j) {
  reject_unknown(j, {"base", "grid"}, "sweep");
  SweepSpec s;
  s.base = j.value("base", json::object());
  if (!j.contains("grid") || !j.at("grid").is_object()) throw ConfigError("sweep: 'grid' must be an object");
  for (const auto& [key, values] : j.at("grid").items()) {
    if (!values.is_array() || values.empty()) throw ConfigError("sweep: grid '" + key + "' must be a nonempty list");
    s.grid.emplace_back(key, std::vector<json>(values.begin(), values.end()));
  }
  if (s.grid.empty()) throw ConfigError("sweep: empty grid");
  ScenarioConfig::from_json(s.base);
  return s;
}

std::vector<SweepEntry> sweep(const SweepSpec& spec, int threads) {
  std::vector<SweepEntry> entries(1);
  entries[0].overrides = json::object();
  for (const auto& [key, values] : spec.grid) {
    std::vector<SweepEntry> next;
    for (const SweepEntry& e : entries) {
      for (const json& v : values) {
        SweepEntry n = e;
        n.overrides[key] = v;
        next.push_back(std::move(n));
      }
    }
    entries = std::move(next);
  }

  const ScenarioConfig base = ScenarioConfig::from_json(spec.base);
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (size_t i = cursor++; i < entries.size(); i = cursor++) {
      SweepEntry& e = entries[i];
      try {
        json j = spec.base;
        for (const auto& [k, v] : e.overrides.items()) j[k] = v;
        ScenarioConfig cfg = ScenarioConfig::from_json(j);
        cfg.output_dir = base.output_dir;
        cfg.prefix = base.prefix + "_" + std::to_string(i);
        e.summary = run_scenario(cfg);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, threads); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (base.write_files) {
    std::filesystem::create_directories(base.output_dir);
    std::ofstream csv(base.output_dir / (base.prefix + ".sweep.csv"));
    csv << "index,overrides,status,config_hash,delta,T,t_star,key_integral_delta,grad_rate,grad_r2,"
           "hessian_rate,hessian_r2,logsum_drift,logsum_part,breach_time,error\n";
    for (size_t i = 0; i < entries.size(); ++i) {
      const SweepEntry& e = entries[i];
      std::string ov = e.overrides.dump();
      std::replace(ov.begin(), ov.end(), ',', ';');
      csv << i << ',' << ov << ',';
      if (!e.summary) {
        std::string err = e.error;
        std::replace(err.begin(), err.end(), ',', ';');
        csv << "error,,,,,,,,,,,,," << err << "\n";
        continue;
      }
      const RunSummary& s = *e.summary;
      auto f = [](double v) { return std::isfinite(v) ? fmt(v) : std::string("nan"); };
      csv << (s.ok() ? "ok" : "breach") << ',' << s.config_hash << ',' << f(s.params.delta) << ',' << f(s.params.T)
          << ',' << (s.t_star ? f(*s.t_star) : "nan") << ',' << f(s.key_integral_delta) << ','
          << (s.grad_fit ? f(s.grad_fit->rate) : "nan") << ',' << (s.grad_fit ? f(s.grad_fit->r2) : "nan") << ','
          << (s.hessian_fit ? f(s.hessian_fit->rate) : "nan") << ',' << (s.hessian_fit ? f(s.hessian_fit->r2) : "nan")
          << ',' << f(s.c_logsum) << ',' << f(s.logsum_part) << ',' << (s.breached ? f(s.breach_time) : "nan")
          << ",\n";
    }
  }
  return entries;
}

// ---------------------------------------------------------------------------
// Property suites

namespace {

SpectralField random_field(std::mt19937_64& rng, int cutoff, int modes, int kmax) {
  std::uniform_int_distribution<int> k(1, kmax);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(cutoff + 1, cutoff + 1);
  for (int m = 0; m < modes; ++m) c(k(rng), k(rng)) += amp(rng);
  return SpectralField(std::move(c), Parity::OddOdd);
}

CheckResult check(std::string name, bool ok, const std::string& detail) { return {std::move(name), ok, detail}; }

void symmetry_suite(std::vector<CheckResult>& out, std::mt19937_64& rng) {
  InitialDataSpec spec;
  spec.kind = DataKind::PartII;
  spec.delta = 0.1;
  const SpectralField w = InitialData(spec).spectral(256, EulerSolver::dealiased_cutoff(256)).field;
  const VelocityField u = velocity_spectral(w);
  const Vec2 u0 = u(Point(0.0, 0.0));
  out.push_back(check("velocity_vanishes_at_origin", u0[0] == 0.0 && u0[1] == 0.0,
                      "u(0) = (" + fmt(u0[0]) + ", " + fmt(u0[1]) + ")"));

  const SpectralField f = random_field(rng, 32, 12, 32);
  const SpectralField g(f.coeffs().transpose().eval(), Parity::OddOdd);
  const VelocityField uf = velocity_spectral(f), ug = velocity_spectral(g);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double swap = 0.0, odd = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Point x(d(rng), d(rng));
    const Vec2 lhs = ug(x);
    const Vec2 rhs = -Vec2(uf.u2(x[1], x[0]), uf.u1(x[1], x[0]));
    swap = std::max(swap, (lhs - rhs).cwiseAbs().maxCoeff());
    odd = std::max({odd, std::abs(f(-x[0], x[1]) + f(x)), std::abs(f(x[0], -x[1]) + f(x))});
  }
  out.push_back(check("coordinate_swap_identity", swap <= 1e-10, "max deviation " + fmt(swap)));
  out.push_back(check("odd_in_each_coordinate", odd <= 1e-12, "max |w(-x1,x2) + w(x)| " + fmt(odd)));

  const double div = sup_norm_on(divergence(uf), SubdomainBox::unit()).value;
  const double usup = std::max(sup_norm_on(uf.u1, SubdomainBox::unit()).value, sup_norm_on(uf.u2, SubdomainBox::unit()).value);
  out.push_back(check("divergence_free", div <= 1e-10 * usup, "sup|div u| = " + fmt(div) + ", ||u|| = " + fmt(usup)));
}

void oracle_suite(std::vector<CheckResult>& out, std::mt19937_64& rng) {
  const int n = 256;
  const int k = EulerSolver::dealiased_cutoff(n);
  std::vector<std::pair<std::string, SpectralField>> fields;
  fields.emplace_back("single_mode", SpectralField::mode({1, 1}, k));
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(k + 1, k + 1);
  c(1, 1) = 1.0;
  c(3, 2) = 0.5;
  fields.emplace_back("two_mode", SpectralField(c, Parity::OddOdd));
  InitialDataSpec spec;
  spec.kind = DataKind::PartII;
  spec.delta = 0.1;
  fields.emplace_back("part_ii_datum", InitialData(spec).spectral(n, k).field);

  std::uniform_real_distribution<double> d(0.05, 0.45);
  LatticeSumParams lp;
  lp.radius = 64;
  for (const auto& [name, w] : fields) {
    const VelocityField u = velocity_spectral(w);
    double worst = -std::numeric_limits<double>::infinity(), diff_max = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Point x(d(rng), d(rng));
      const DirectVelocity dv = velocity_direct(w, x, lp);
      const Vec2 diff = (u(x) - dv.u).cwiseAbs();
      const Vec2 allowed = dv.tail.array() + 1e-4;
      worst = std::max(worst, (diff.array() - allowed.array()).maxCoeff());
      diff_max = std::max(diff_max, diff.maxCoeff());
    }
    out.push_back(check("oracle_equivalence_" + name, worst <= 0.0, "max discrepancy " + fmt(diff_max)));
  }

  const SpectralField m = SpectralField::mode({1, 1}, 8);
  const VelocityField um = velocity_spectral(m);
  double err = 0.0;
  std::uniform_real_distribution<double> e(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double x1 = e(rng), x2 = e(rng);
    const double u1 = -std::sin(kPi * x1) * std::cos(kPi * x2) / (2 * kPi);
    const double u2 = std::cos(kPi * x1) * std::sin(kPi * x2) / (2 * kPi);
    err = std::max({err, std::abs(um.u1(x1, x2) - u1), std::abs(um.u2(x1, x2) - u2)});
  }
  out.push_back(check("single_mode_closed_form", err <= 1e-10, "max deviation " + fmt(err)));
}

void quadrature_suite(std::vector<CheckResult>& out, std::mt19937_64& rng) {
  FunctionSampler one([](double, double) { return 1.0; });
  const KeyIntegralResult r1 = key_integral(one, Point(0.25, 0.25));
  const double exact = 2.0 / kPi * std::log(1.25);
  out.push_back(check("key_integral_constant_field", std::abs(r1.value - exact) <= 1e-12,
                      "I = " + fmt(r1.value) + " vs " + fmt(exact)));

  int consistent = 0;
  double worst = 0.0;
  std::uniform_real_distribution<double> lx(std::log(0.002), std::log(0.45));
  for (int i = 0; i < 50; ++i) {
    const SpectralField w = random_field(rng, 24, 6, 24);
    const Point x(std::exp(lx(rng)), std::exp(lx(rng)));
    KeyIntegralOptions coarse;
    coarse.abs_tol = 1e-8;
    coarse.rel_tol = 1e-6;
    KeyIntegralOptions fine = coarse;
    fine.abs_tol *= 1e-3;
    fine.rel_tol *= 1e-3;
    const KeyIntegralResult a = key_integral(w, x, coarse);
    const KeyIntegralResult b = key_integral(w, x, fine);
    const double gap = std::abs(a.value - b.value);
    if (gap <= a.error) ++consistent;
    worst = std::max(worst, a.error > 0.0 ? gap / a.error : (gap > 0.0 ? 1e300 : 0.0));
  }
  out.push_back(check("key_integral_two_level", consistent == 50,
                      std::to_string(consistent) + "/50 probes, worst gap/estimate " + fmt(worst)));

  const SpectralField w = random_field(rng, 16, 5, 8);
  const VelocityField u = velocity_spectral(w);
  double rec = 0.0;
  std::uniform_real_distribution<double> d(0.01, 0.45);
  for (int i = 0; i < 10; ++i) {
    const Point x(d(rng), d(rng));
    const auto b = bj_residuals(w, u, x);
    for (const BjResidual& r : b) {
      const double sign = r.j == 1 ? -1.0 : 1.0;
      rec = std::max(rec, std::abs(sign * (r.key_integral + r.B) * x[r.j - 1] - r.velocity));
    }
  }
  out.push_back(check("bj_reconstruction", rec <= 1e-12, "max |u_j - reconstruction| " + fmt(rec)));
}

}  // namespace

std::vector<CheckResult> verify(const std::string& suite, std::uint64_t seed) {
  if (suite != "symmetry" && suite != "oracle" && suite != "quadrature" && suite != "all") {
    throw ConfigError("unknown suite '" + suite + "' (symmetry, oracle, quadrature, all)");
  }
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  if (suite == "symmetry" || suite == "all") symmetry_suite(out, rng);
  if (suite == "oracle" || suite == "all") oracle_suite(out, rng);
  if (suite == "quadrature" || suite == "all") quadrature_suite(out, rng);
  return out;
}

}  // namespace oddflow
