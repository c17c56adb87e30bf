#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "oddflow/diagnostics.hpp"
#include "oddflow/evolution.hpp"
#include "oddflow/initial_data.hpp"
#include "oddflow/scenario.hpp"

using namespace oddflow;
using nlohmann::json;

namespace {

int passed = 0, total = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  ++total;
  passed += ok;
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const CheckResult* find(const std::vector<CheckResult>& checks, const std::string& prefix) {
  for (const CheckResult& c : checks) {
    if (c.name.rfind(prefix, 0) == 0) return &c;
  }
  return nullptr;
}

void from_checks(const std::string& name, const std::vector<CheckResult>& checks, const std::vector<std::string>& prefixes) {
  bool ok = true;
  std::string detail;
  for (const std::string& p : prefixes) {
    for (const CheckResult& c : checks) {
      if (c.name.rfind(p, 0) != 0) continue;
      ok = ok && c.passed;
      detail += (detail.empty() ? "" : "; ") + c.name + ": " + c.detail;
    }
    if (!find(checks, p)) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + p + ": missing";
    }
  }
  report(name, ok, detail);
}

ScenarioConfig quiet(json j) {
  j["output"] = {{"write_files", false}};
  return ScenarioConfig::from_json(j);
}

double relative(double now, double ref) { return std::abs(now / ref - 1.0); }

void conservation(const json& cfg, const json& th) {
  InitialDataSpec spec;
  spec.kind = data_kind_from_string(cfg["data"].get<std::string>());
  spec.delta = cfg["delta"];
  const int n = cfg["N"];
  const EulerSolver solver(n);
  const EvolutionState s0 = solver.initial_state(InitialData(spec).spectral(n, solver.cutoff()).field);

  RunOptions fwd;
  fwd.horizon = cfg["T"];
  fwd.records = cfg["records"];
  fwd.stop_on_breach = false;
  const RunResult f = run(solver, s0, fwd);
  const MonitorRecord& ref = f.series.front();
  double de = 0, dz = 0, ds = 0;
  for (const MonitorRecord& m : f.series) {
    de = std::max(de, relative(m.energy, ref.energy));
    dz = std::max(dz, relative(m.enstrophy, ref.enstrophy));
    ds = std::max(ds, relative(m.sup_norm, ref.sup_norm));
  }
  RunOptions back = fwd;
  back.horizon = 0.0;
  const RunResult b = run(solver, f.final, back);
  const SpectralField diff(b.final.omega.coeffs() - s0.omega.coeffs(), Parity::OddOdd);
  const double rev = sup_norm_on(diff, SubdomainBox::unit()).value / ref.sup_norm;
  const double factor = th["reversal_factor"].get<double>();
  const bool ok = de <= th["energy_drift"].get<double>() && dz <= th["enstrophy_drift"].get<double>() &&
                  ds <= th["sup_drift"].get<double>() && rev <= factor * ds;
  report("conservation", ok,
         "energy " + fmt(de) + ", enstrophy " + fmt(dz) + ", sup norm " + fmt(ds) + " (threshold " +
             fmt(th["sup_drift"].get<double>()) + "), reversal " + fmt(rev) + " vs " + fmt(factor) + " x " + fmt(ds));

  const SupResult axis = axis_derivative_residual(f.final.omega);
  const double rel = axis.value / sup_norm_on(f.final.omega, SubdomainBox::unit()).value;
  report("axis_invariant", rel <= th["axis_residual"].get<double>(),
         "sup|d1 w(T,0,s)| / ||w|| = " + fmt(rel) + " at s = " + fmt(axis.location[1]) + " (initial " +
             fmt(axis_derivative_residual(s0.omega).value / ref.sup_norm) + ")");
}

void key_band(const json& deltas, const json& th) {
  const double lo = th["key_band"][0], hi = th["key_band"][1];
  bool ok = lo > 0.0;
  std::string detail;
  for (double d : deltas) {
    InitialDataSpec spec;
    spec.kind = DataKind::PartI;
    spec.delta = d;
    const InitialData datum(spec);
    const FunctionSampler w([&datum](double a, double b) { return datum(a, b); });
    const KeyIntegralResult r = key_integral(w, Point(d, d));
    const double ratio = r.value / std::abs(std::log(d));
    ok = ok && r.converged && ratio >= lo && ratio <= hi;
    detail += "delta " + fmt(d) + ": " + fmt(ratio) + "  ";
  }
  report("key_integral_band", ok, detail + "band [" + fmt(lo) + ", " + fmt(hi) + "]");
}

void hyperbolicity(const RunSummary& s) {
  double worst1 = -INFINITY, worst2 = INFINITY;
  const double side = s.params.box_side;
  for (const TrajectorySample& x : s.trajectory.samples) {
    if (x.x[0] > side || x.x[1] > side) continue;
    worst1 = std::max(worst1, x.u[0]);
    worst2 = std::min(worst2, x.u[1]);
  }
  const bool exited_top = s.t_star.has_value() && s.exit_edge == 2;
  report("hyperbolicity_signs", worst1 < 0.0 && worst2 > 0.0 && exited_top,
         "max u1 " + fmt(worst1) + ", min u2 " + fmt(worst2) + ", exit edge " + std::to_string(s.exit_edge) +
             (s.t_star ? " at t = " + fmt(*s.t_star) : std::string(" (no exit)")));
}

std::string describe(const std::string& label, const std::optional<GrowthFit>& fit, const std::string& error, double r2,
                     bool& ok) {
  if (!fit) {
    ok = false;
    return label + ": no fit (" + error + ")";
  }
  ok = ok && fit->rate > 0.0 && fit->r2 >= r2;
  return label + ": rate " + fmt(fit->rate) + ", R2 " + fmt(fit->r2) + " on [" + fmt(fit->t0) + ", " + fmt(fit->t1) +
         "]";
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path path = argc > 1 ? argv[1] : ODDFLOW_ACCEPTANCE_CONFIG;
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "cannot open %s\n", path.string().c_str());
    return 2;
  }
  const json cfg = json::parse(in, nullptr, true, true);
  const json& th = cfg["thresholds"];

  try {
    const std::vector<CheckResult> oracle = verify("oracle");
    from_checks("oracle_equivalence", oracle, {"oracle_equivalence_"});
    from_checks("single_mode_closed_form", oracle, {"single_mode_closed_form"});
    from_checks("symmetry_suite", verify("symmetry"),
                {"velocity_vanishes_at_origin", "coordinate_swap_identity", "divergence_free"});

    conservation(cfg["conservation"], th);
    key_band(cfg["key_deltas"], th);

    const ScenarioConfig c1 = quiet(cfg["part_i"]);
    const RunSummary r1 = run_scenario(c1);
    const double cells = r1.params.x0[0] * c1.N;
    if (cells < th["min_start_cells"].get<double>()) {
      report("hyperbolicity_signs", false, "start point spans only " + fmt(cells) + " cells");
    } else {
      hyperbolicity(r1);
    }

    std::vector<RunSummary> sweep_runs;
    for (double d : cfg["logsum_deltas"]) {
      if (d == c1.delta.value()) {
        sweep_runs.push_back(r1);
        continue;
      }
      json j = cfg["part_i"];
      j["delta"] = d;
      sweep_runs.push_back(run_scenario(quiet(j)));
    }
    {
      const double bound = th["logsum_bound"], contrast = th["logsum_contrast"];
      bool ok = true;
      std::string detail;
      for (std::size_t i = 0; i < sweep_runs.size(); ++i) {
        const RunSummary& s = sweep_runs[i];
        ok = ok && s.c_logsum <= bound;
        if (i > 0) ok = ok && s.logsum_part > sweep_runs[i - 1].logsum_part;
        detail += "delta " + fmt(s.params.delta) + ": drift " + fmt(s.c_logsum) + ", part " + fmt(s.logsum_part) + "  ";
      }
      const RunSummary& last = sweep_runs.back();
      const double ratio = last.logsum_part / last.c_logsum;
      ok = ok && ratio >= contrast;
      report("logsum_drift", ok, detail + "contrast " + fmt(ratio));
    }

    report("transport_fidelity", r1.transport_drift <= th["transport_drift"].get<double>(),
           "max relative drift " + fmt(r1.transport_drift) + " over [0, " + fmt(r1.t_prime) + "] at N = " +
               std::to_string(c1.N));

    const RunSummary r2 = run_scenario(quiet(cfg["part_ii"]));
    bool ok = true;
    const std::string d1 = describe("part i sup|grad w|", r1.grad_fit, r1.grad_fit_error, th["growth_r2"], ok);
    const std::string d2 = describe("part ii sup|D2 w|", r2.hessian_fit, r2.hessian_fit_error, th["growth_r2"], ok);
    report("growth", ok, d1 + "; " + d2 + " (R2 threshold " + fmt(th["growth_r2"]) + ")");

    from_checks("quadrature_two_level", verify("quadrature"), {"key_integral_two_level"});
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 1;
  }

  std::printf("%d of %d criteria pass\n", passed, total);
  return 0;
}
