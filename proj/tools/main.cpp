// mcsched command-line harness: solve instances, run experiment sweeps and
// timing comparisons, dump policies and verify structural properties.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcsched/config_io.hpp"
#include "mcsched/errors.hpp"
#include "mcsched/experiment.hpp"
#include "mcsched/policies.hpp"
#include "mcsched/solvers.hpp"

namespace {

using namespace mcsched;

SolveReport solve_with(const std::string& solver, const SystemConfig& config,
                       const ArrivalDistribution& arrivals, std::size_t max_states) {
  SolveOptions options;
  options.max_states = max_states;
  if (solver == "rvia") return rvia(config, arrivals, options);
  if (solver == "srvia") return srvia(config, arrivals, options);
  if (solver == "pia") return pia(config, arrivals, options);
  if (solver == "spia") return spia(config, arrivals, options);
  throw std::invalid_argument("unknown solver: " + solver);
}

void print_report(const SolveReport& report) {
  std::printf("theta              %.9f\n", report.theta);
  std::printf("iterations         %d%s\n", report.iterations,
              report.converged ? "" : " (not converged)");
  std::printf("minimizations      %zu performed, %zu skipped\n",
              report.counters.total_performed(), report.counters.total_skipped());
  std::printf("wall seconds       %.6f\n", report.wall_seconds);
}

int cmd_solve(const std::string& config_path, const std::string& solver,
              const std::string& out_dir, std::size_t max_states) {
  const InstanceSpec spec = load_instance(config_path);
  const ArrivalDistribution arrivals = build_arrivals(spec);
  const SolveReport report = solve_with(solver, spec.config, arrivals, max_states);
  print_report(report);
  if (!out_dir.empty()) {
    for (const std::string& path :
         dump_policy(report.policy, spec.config, out_dir, solver)) {
      std::printf("wrote %s\n", path.c_str());
    }
    const std::string counters_path =
        (std::filesystem::path(out_dir) / (solver + "_counters.csv")).string();
    write_text_file(counters_path, counters_csv(report.counters));
    std::printf("wrote %s\n", counters_path.c_str());

    nlohmann::json summary{{"solver", solver},
                           {"theta", report.theta},
                           {"iterations", report.iterations},
                           {"converged", report.converged},
                           {"wall_seconds", report.wall_seconds},
                           {"minimizations_performed", report.counters.total_performed()},
                           {"minimizations_skipped", report.counters.total_skipped()},
                           {"states", report.values.size()}};
    const std::string report_path =
        (std::filesystem::path(out_dir) / (solver + "_report.json")).string();
    write_text_file(report_path, summary.dump(2) + "\n");
    std::printf("wrote %s\n", report_path.c_str());
  }
  return report.converged ? 0 : 3;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   std::uint64_t seed, bool seed_set, std::size_t max_states,
                   bool max_states_set) {
  ExperimentSpec spec = load_experiment(config_path);
  if (seed_set) spec.sim.seed = seed;
  if (max_states_set) spec.max_states = max_states;
  const ExperimentResult result = run_experiment(spec);
  const std::string path =
      (std::filesystem::path(out_dir.empty() ? "." : out_dir) / spec.output).string();
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  write_text_file(path, result.csv);
  std::printf("wrote %s (%zu rows)\n", path.c_str(), result.rows.size());
  return 0;
}

int cmd_timing(const std::string& config_path, const std::string& out_dir,
               std::size_t max_states, bool max_states_set) {
  ExperimentSpec spec = load_experiment(config_path);
  if (max_states_set) spec.max_states = max_states;
  const TimingResult result = run_timing_comparison(spec);
  std::fputs(result.csv.c_str(), stdout);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string path = (std::filesystem::path(out_dir) / "timing.csv").string();
    write_text_file(path, result.csv);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_dump_policy(const std::string& config_path, const std::string& solver,
                    const std::string& out_dir, std::size_t max_states) {
  const InstanceSpec spec = load_instance(config_path);
  const ArrivalDistribution arrivals = build_arrivals(spec);
  const SolveReport report = solve_with(solver, spec.config, arrivals, max_states);
  for (const std::string& path : dump_policy(report.policy, spec.config, out_dir, solver)) {
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_verify(const std::string& config_path, const std::string& solver,
               const std::string& out_dir, std::size_t max_states) {
  const InstanceSpec spec = load_instance(config_path);
  const ArrivalDistribution arrivals = build_arrivals(spec);
  const SolveReport report = solve_with(solver, spec.config, arrivals, max_states);
  print_report(report);

  int failures = 0;
  auto check = [&](const char* name, std::size_t violations) {
    std::printf("%-34s %s (%zu violations)\n", name, violations == 0 ? "PASS" : "FAIL",
                violations);
    if (violations != 0) ++failures;
  };

  const std::vector<SwitchViolation> violations =
      spec.config.uniform() ? verify_switch_structure(report.policy, spec.config)
                            : verify_partial_switch_structure(report.policy, spec.config);
  check(spec.config.uniform() ? "switch structure" : "partial switch structure",
        violations.size());
  if (spec.config.uniform() && spec.config.num_contents == 2 && violations.empty()) {
    const std::vector<SwitchCurve> curves = extract_switch_curves(report.policy, spec.config);
    std::size_t bad = 0;
    for (const SwitchCurve& curve : curves) bad += verify_monotone_curve(curve) ? 0 : 1;
    check("monotone switch curves", bad);
  }
  check("value monotonicity", value_monotonicity_violations(report.values, spec.config));
  check("state-action cost differences",
        j_difference_violations(spec.config, arrivals, report.values));

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::string csv = "# mcsched-violations v1\nstate,action\n";
    for (const SwitchViolation& v : violations) {
      csv += std::to_string(v.state) + "," + std::to_string(v.action) + "\n";
    }
    const std::string path =
        (std::filesystem::path(out_dir) / "switch_violations.csv").string();
    write_text_file(path, csv);
    std::printf("wrote %s\n", path.c_str());
  }
  return failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multicast scheduling MDP toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, solver = "srvia";
  std::size_t max_states = kDefaultMaxStates;
  std::uint64_t seed = 0;

  auto* solve = app.add_subcommand("solve", "solve an instance and print the report");
  solve->add_option("--config", config_path, "instance JSON")->required();
  solve->add_option("--solver", solver, "rvia|srvia|pia|spia");
  solve->add_option("--out", out_dir, "directory for policy/curve CSV dumps");
  solve->add_option("--max-states", max_states, "state-space capacity bound");

  auto* experiment = app.add_subcommand("experiment", "run a sweep and write results CSV");
  experiment->add_option("--config", config_path, "experiment JSON")->required();
  experiment->add_option("--out", out_dir, "output directory");
  auto* seed_opt = experiment->add_option("--seed", seed, "simulation seed override");
  auto* exp_max = experiment->add_option("--max-states", max_states, "capacity bound");

  auto* timing = app.add_subcommand("timing", "solver timing comparison CSV");
  timing->add_option("--config", config_path, "experiment JSON")->required();
  timing->add_option("--out", out_dir, "output directory");
  auto* tim_max = timing->add_option("--max-states", max_states, "capacity bound");

  auto* dump = app.add_subcommand("dump-policy", "solve and dump the policy table/curves");
  dump->add_option("--config", config_path, "instance JSON")->required();
  dump->add_option("--solver", solver, "rvia|srvia|pia|spia");
  dump->add_option("--out", out_dir, "output directory")->required();
  dump->add_option("--max-states", max_states, "state-space capacity bound");

  auto* verify = app.add_subcommand("verify", "solve and run the structural verifiers");
  verify->add_option("--config", config_path, "instance JSON")->required();
  verify->add_option("--solver", solver, "rvia|srvia|pia|spia");
  verify->add_option("--out", out_dir, "directory for the violation-list CSV");
  verify->add_option("--max-states", max_states, "state-space capacity bound");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(config_path, solver, out_dir, max_states);
    if (experiment->parsed()) {
      return cmd_experiment(config_path, out_dir, seed, seed_opt->count() > 0, max_states,
                            exp_max->count() > 0);
    }
    if (timing->parsed()) {
      return cmd_timing(config_path, out_dir, max_states, tim_max->count() > 0);
    }
    if (dump->parsed()) return cmd_dump_policy(config_path, solver, out_dir, max_states);
    if (verify->parsed()) return cmd_verify(config_path, solver, out_dir, max_states);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
