#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcsched/config_io.hpp"
#include "mcsched/sim.hpp"
#include "mcsched/solvers.hpp"
#include "mcsched/tables.hpp"

namespace mcsched {

struct SweepAxes {
  std::vector<double> weight_fetch;
  std::vector<double> weight_power;
  std::vector<double> alpha;
  std::vector<int> num_users;
  std::vector<int> threshold;  // applies to the threshold policy only
};

struct ExperimentSpec {
  InstanceSpec instance;
  std::vector<std::string> policies{"optimal", "ssa", "lqf", "myopic"};
  std::string solver = "srvia";  // rvia | srvia | pia | spia
  std::string mode = "exact";    // exact | simulate
  SweepAxes sweeps;
  SimOptions sim;
  std::size_t max_states = kDefaultMaxStates;
  std::size_t support_cap = kDefaultSupportCap;
  int timing_repeats = 5;
  std::vector<std::string> timing_solvers{"rvia", "srvia", "pia", "spia", "ssa"};
  std::string output = "results.csv";
};

ExperimentSpec parse_experiment_text(const std::string& text);
ExperimentSpec load_experiment(const std::string& path);

struct ExperimentRow {
  double weight_fetch = 0.0;
  double weight_power = 0.0;
  double alpha = 0.0;
  int num_users = 0;
  int threshold = 0;   // 0 for non-threshold policies
  int replication = 0;  // 0 = exact result or aggregate over replications
  std::string policy;
  CostBreakdown cost;
  CostBreakdown stderr_of_mean;  // zero in exact mode and replication rows
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::string csv;
};

// Per-iteration structured-update accounting as CSV.
std::string counters_csv(const SweepCounters& counters);

// One row per (grid point, policy), deterministic given the spec and seed.
// Grid points run in a work pool; rows are gathered in grid order.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct TimingRow {
  std::string solver;
  double median_seconds = 0.0;
  int iterations = 0;
  std::size_t minimizations_performed = 0;
  std::size_t minimizations_skipped = 0;
  double skip_fraction = 0.0;  // cumulative from iteration 2
  double theta = 0.0;
};

struct TimingResult {
  std::vector<TimingRow> rows;
  std::string csv;
};

TimingResult run_timing_comparison(const ExperimentSpec& spec);

// Writes the state->action table and, when the structure verifies, the
// switch-curve files next to it. Returns the written paths.
std::vector<std::string> dump_policy(const PolicyTable& policy, const SystemConfig& config,
                                     const std::string& out_dir, const std::string& stem);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace mcsched
