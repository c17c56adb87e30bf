#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "oddflow/initial_data.hpp"
#include "oddflow/scenario.hpp"

namespace {

using namespace oddflow;

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

void print_summary(const RunSummary& s) {
  std::cout << "config " << s.config_hash << "  t = " << s.final_t << "  T' = " << s.t_prime;
  if (s.t_star) std::cout << "  T* = " << *s.t_star << " (edge " << s.exit_edge << ")";
  std::cout << "\n";
  if (s.breached) std::cout << "monitor breach at t = " << s.breach_time << ": " << s.breach_reason << "\n";
  for (const ScoreEntry& e : s.scorecard) {
    std::cout << "  " << e.name << ": " << to_string(e.verdict) << "  measured " << e.measured << "  bound "
              << e.bound << "  (" << e.note << ")\n";
  }
  if (s.grad_fit) std::cout << "  grad_sup rate " << s.grad_fit->rate << " R2 " << s.grad_fit->r2 << "\n";
  if (s.hessian_fit) std::cout << "  hessian_sup rate " << s.hessian_fit->rate << " R2 " << s.hessian_fit->r2 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oddflow: odd-odd 2D Euler runs and diagnostics"};
  app.require_subcommand(1);

  std::string config_path, output_dir, sweep_path, suite = "all", kind = "part_i";
  bool quiet = false;
  int threads = 0, audit_n = 2048;
  std::uint64_t seed = 1;
  double delta = 0.05, alpha = 0.5;

  auto* run_cmd = app.add_subcommand("run", "run one scenario from a JSON config");
  run_cmd->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output-dir", output_dir, "output directory (overrides config)");
  run_cmd->add_flag("-q,--quiet", quiet, "print only the exit status");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid over a template config");
  sweep_cmd->add_option("spec", sweep_path, "sweep file with 'base' and 'grid'")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("-o,--output-dir", output_dir, "output directory (overrides config)");
  sweep_cmd->add_option("-j,--threads", threads, "worker threads");

  auto* verify_cmd = app.add_subcommand("verify", "run property suites");
  verify_cmd->add_option("suite", suite, "symmetry, oracle, quadrature or all")
      ->check(CLI::IsMember({"symmetry", "oracle", "quadrature", "all"}));
  verify_cmd->add_option("--seed", seed, "random seed");

  auto* audit_cmd = app.add_subcommand("audit-data", "audit an initial datum and print the report as JSON");
  audit_cmd->add_option("--kind", kind, "part_i or part_ii")->check(CLI::IsMember({"part_i", "part_ii"}));
  audit_cmd->add_option("--delta", delta, "plateau deficit");
  audit_cmd->add_option("--alpha", alpha, "Holder exponent (part_i)");
  audit_cmd->add_option("--n", audit_n, "audit grid size");
  audit_cmd->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  if (output_dir.empty()) output_dir = env("ODDFLOW_OUTPUT_DIR").value_or("");
  if (threads <= 0) threads = env("ODDFLOW_THREADS") ? std::atoi(env("ODDFLOW_THREADS")->c_str()) : 1;

  try {
    if (*run_cmd) {
      ScenarioConfig cfg = ScenarioConfig::load(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      const RunSummary s = run_scenario(cfg);
      if (!quiet) print_summary(s);
      std::cout << (s.ok() ? "ok" : "not ok") << "\n";
      return s.ok() ? 0 : 1;
    }
    if (*sweep_cmd) {
      std::ifstream in(sweep_path);
      SweepSpec spec = SweepSpec::from_json(nlohmann::json::parse(in, nullptr, true, true));
      if (!output_dir.empty()) {
        if (!spec.base.contains("output")) spec.base["output"] = nlohmann::json::object();
        spec.base["output"]["dir"] = output_dir;
      }
      const auto entries = sweep(spec, threads);
      bool all_ok = true;
      for (size_t i = 0; i < entries.size(); ++i) {
        const SweepEntry& e = entries[i];
        std::cout << i << " " << e.overrides.dump() << ": ";
        if (!e.summary) {
          std::cout << "error: " << e.error << "\n";
          all_ok = false;
          continue;
        }
        std::cout << (e.summary->ok() ? "ok" : "not ok") << "\n";
        all_ok = all_ok && e.summary->ok();
      }
      return all_ok ? 0 : 1;
    }
    if (*verify_cmd) {
      bool all = true;
      for (const CheckResult& c : verify(suite, seed)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
        all = all && c.passed;
      }
      return all ? 0 : 1;
    }
    if (*audit_cmd) {
      InitialDataSpec spec;
      spec.kind = data_kind_from_string(kind);
      spec.delta = delta;
      spec.alpha = alpha;
      const AuditReport r = audit(InitialData(spec), audit_n, seed);
      std::cout << r.to_json() << "\n";
      return r.passed ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
