#include "mcsched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mcsched/errors.hpp"
#include "mcsched/policies.hpp"
#include "mcsched/solvers.hpp"

namespace mcsched {

namespace {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

struct GridPoint {
  double weight_fetch;
  double weight_power;
  double alpha;
  int num_users;
};

// Instance at a grid point; rebuilds arrivals when alpha or K changed.
struct BuiltInstance {
  SystemConfig config;
  ArrivalDistribution arrivals;
  BasePolicy base;
};

BuiltInstance build_at(const ExperimentSpec& spec, const GridPoint& point) {
  InstanceSpec inst = spec.instance;
  inst.config.weight_fetch = point.weight_fetch;
  inst.config.weight_power = point.weight_power;
  if (inst.arrivals.kind == ArrivalSpec::Kind::kPerUserZipf) {
    inst.arrivals.alpha = point.alpha;
    inst.config.num_users = point.num_users;
    if (!inst.config.uniform() && point.num_users != spec.instance.config.num_users) {
      throw std::invalid_argument("user-count sweeps require the uniform case");
    }
  }
  BuiltInstance built{inst.config, build_arrivals(inst, spec.support_cap),
                      build_base_policy(inst)};
  built.config.validate();
  return built;
}

SolveReport run_solver(const std::string& name, const SystemConfig& config,
                       const ArrivalDistribution& arrivals, std::size_t max_states) {
  SolveOptions options;
  options.max_states = max_states;
  if (name == "rvia") return rvia(config, arrivals, options);
  if (name == "srvia") return srvia(config, arrivals, options);
  if (name == "pia") return pia(config, arrivals, options);
  if (name == "spia") return spia(config, arrivals, options);
  throw std::invalid_argument("unknown solver: " + name);
}

// Exact mode yields one row; simulate mode yields one row per replication
// plus the aggregate (replication 0) carrying the standard errors.
std::vector<ExperimentRow> evaluate_policy_at(const ExperimentSpec& spec,
                                              const BuiltInstance& built,
                                              const GridPoint& point,
                                              const std::string& policy, int threshold) {
  ExperimentRow proto;
  proto.weight_fetch = point.weight_fetch;
  proto.weight_power = point.weight_power;
  proto.alpha = point.alpha;
  proto.num_users = point.num_users;
  proto.threshold = threshold;
  proto.policy = policy;

  const bool exact = spec.mode == "exact";
  if (!exact && spec.mode != "simulate") {
    throw std::invalid_argument("mode must be exact or simulate");
  }

  auto exact_rows = [&](CostBreakdown cost) {
    ExperimentRow row = proto;
    row.cost = cost;
    return std::vector<ExperimentRow>{row};
  };
  auto simulated_rows = [&](const PolicyHandle& handle) {
    const SimResult result = simulate(handle, built.config, built.arrivals, spec.sim);
    std::vector<ExperimentRow> rows;
    for (std::size_t r = 0; r < result.replications.size(); ++r) {
      ExperimentRow row = proto;
      row.replication = static_cast<int>(r) + 1;
      row.cost = result.replications[r];
      rows.push_back(std::move(row));
    }
    ExperimentRow aggregate = proto;
    aggregate.cost = result.mean;
    aggregate.stderr_of_mean = result.stderr_of_mean;
    rows.push_back(std::move(aggregate));
    return rows;
  };

  if (policy == "optimal") {
    const SolveReport report =
        run_solver(spec.solver, built.config, built.arrivals, spec.max_states);
    return exact ? exact_rows(exact_average_cost(report.policy, built.config, built.arrivals))
                 : simulated_rows(TablePolicyHandle(report.policy, built.config));
  }
  if (policy == "ssa") {
    if (exact) {
      const PolicyTable table = ssa(built.config, built.arrivals, built.base, spec.max_states);
      return exact_rows(exact_average_cost(table, built.config, built.arrivals));
    }
    const Decomposition decomp = decompose(built.base, built.config, built.arrivals);
    return simulated_rows(FunctionPolicyHandle(
        [&](const QueueState& q) { return ssa_action(decomp, built.config, q); }));
  }
  if (policy == "random") {
    return exact
               ? exact_rows(exact_average_cost_randomized(built.base, built.config,
                                                          built.arrivals))
               : simulated_rows(RandomPolicyHandle(built.base));
  }
  if (policy == "lqf") {
    return exact ? exact_rows(exact_average_cost(baseline_lqf(built.config, spec.max_states),
                                                 built.config, built.arrivals))
                 : simulated_rows(FunctionPolicyHandle(
                       [&](const QueueState& q) { return lqf_action(built.config, q); }));
  }
  if (policy == "myopic") {
    return exact ? exact_rows(exact_average_cost(myopic_policy(built.config, spec.max_states),
                                                 built.config, built.arrivals))
                 : simulated_rows(FunctionPolicyHandle(
                       [&](const QueueState& q) { return myopic_action(built.config, q); }));
  }
  if (policy == "threshold") {
    const std::vector<int> thresholds(static_cast<std::size_t>(built.config.num_contents),
                                      threshold);
    return exact
               ? exact_rows(exact_average_cost(
                     baseline_threshold(built.config, thresholds, spec.max_states),
                     built.config, built.arrivals))
               : simulated_rows(FunctionPolicyHandle([&](const QueueState& q) {
                   return threshold_action(built.config, thresholds, q);
                 }));
  }
  throw std::invalid_argument("unknown policy: " + policy);
}

// Deterministic work pool: jobs indexed up front, results written into their
// slots, gathered in grid order regardless of completion order.
template <typename Job>
void run_pool(std::vector<Job>& jobs) {
  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(jobs.size())));
  if (workers <= 1) {
    for (Job& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          jobs[i]();
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

SweepAxes filled_axes(const ExperimentSpec& spec) {
  SweepAxes axes = spec.sweeps;
  if (axes.weight_fetch.empty()) axes.weight_fetch = {spec.instance.config.weight_fetch};
  if (axes.weight_power.empty()) axes.weight_power = {spec.instance.config.weight_power};
  if (axes.alpha.empty()) axes.alpha = {spec.instance.arrivals.alpha};
  if (axes.num_users.empty()) axes.num_users = {spec.instance.config.num_users};
  if (axes.threshold.empty()) axes.threshold = {1};
  return axes;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const SweepAxes axes = filled_axes(spec);
  std::vector<GridPoint> grid;
  for (double wf : axes.weight_fetch) {
    for (double wp : axes.weight_power) {
      for (double alpha : axes.alpha) {
        for (int users : axes.num_users) grid.push_back({wf, wp, alpha, users});
      }
    }
  }

  struct Task {
    GridPoint point;
    std::string policy;
    int threshold;
  };
  std::vector<Task> tasks;
  for (const GridPoint& point : grid) {
    for (const std::string& policy : spec.policies) {
      if (policy == "threshold") {
        for (int t : axes.threshold) tasks.push_back({point, policy, t});
      } else {
        tasks.push_back({point, policy, 0});
      }
    }
  }

  std::vector<std::vector<ExperimentRow>> groups(tasks.size());
  std::vector<std::function<void()>> jobs;
  jobs.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    jobs.emplace_back([&spec, &tasks, &groups, i] {
      const Task& task = tasks[i];
      try {
        const BuiltInstance built = build_at(spec, task.point);
        groups[i] = evaluate_policy_at(spec, built, task.point, task.policy, task.threshold);
      } catch (const CapacityError& e) {
        throw CapacityError("grid point (w_f=" + format_double(task.point.weight_fetch) +
                                ", w_p=" + format_double(task.point.weight_power) +
                                ", alpha=" + format_double(task.point.alpha) +
                                ", K=" + std::to_string(task.point.num_users) + "): " + e.what(),
                            e.required(), e.limit());
      }
    });
  }
  run_pool(jobs);

  ExperimentResult result;
  for (std::vector<ExperimentRow>& group : groups) {
    for (ExperimentRow& row : group) result.rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << "# mcsched-results v1\n";
  csv << "weight_fetch,weight_power,alpha,num_users,threshold,policy,mode,replication,"
         "delay,power,fetch,total,stderr_total\n";
  for (const ExperimentRow& row : result.rows) {
    csv << format_double(row.weight_fetch) << ',' << format_double(row.weight_power) << ','
        << format_double(row.alpha) << ',' << row.num_users << ',' << row.threshold << ','
        << row.policy << ',' << spec.mode << ',' << row.replication << ','
        << format_double(row.cost.delay) << ',' << format_double(row.cost.power) << ','
        << format_double(row.cost.fetch) << ',' << format_double(row.cost.total) << ','
        << format_double(row.stderr_of_mean.total) << '\n';
  }
  result.csv = csv.str();
  return result;
}

std::string counters_csv(const SweepCounters& counters) {
  std::ostringstream csv;
  csv << "# mcsched-counters v1\n";
  csv << "iteration,minimizations_performed,minimizations_skipped\n";
  for (std::size_t i = 0; i < counters.performed.size(); ++i) {
    csv << (i + 1) << ',' << counters.performed[i] << ',' << counters.skipped[i] << '\n';
  }
  return csv.str();
}

TimingResult run_timing_comparison(const ExperimentSpec& spec) {
  InstanceSpec inst = spec.instance;
  const SystemConfig& config = inst.config;
  const ArrivalDistribution arrivals = build_arrivals(inst, spec.support_cap);
  const BasePolicy base = build_base_policy(inst);

  TimingResult result;
  for (const std::string& name : spec.timing_solvers) {
    TimingRow row;
    row.solver = name;
    std::vector<double> times;
    for (int r = 0; r < std::max(1, spec.timing_repeats); ++r) {
      if (name == "ssa") {
        const SsaReport report = ssa_report(config, arrivals, base, spec.max_states);
        times.push_back(report.wall_seconds);
        if (r == 0) {
          row.minimizations_performed = report.minimizations_performed;
          row.minimizations_skipped = report.minimizations_skipped;
          row.skip_fraction =
              static_cast<double>(report.minimizations_skipped) /
              static_cast<double>(report.minimizations_performed + report.minimizations_skipped);
          row.iterations = 1;
          row.theta = exact_average_cost(report.policy, config, arrivals).total;
        }
      } else {
        const SolveReport report = run_solver(name, config, arrivals, spec.max_states);
        times.push_back(report.wall_seconds);
        if (r == 0) {
          row.iterations = report.iterations;
          row.minimizations_performed = report.counters.total_performed();
          row.minimizations_skipped = report.counters.total_skipped();
          row.skip_fraction = report.counters.skip_fraction(2);
          row.theta = report.theta;
        }
      }
    }
    std::sort(times.begin(), times.end());
    row.median_seconds = times[times.size() / 2];
    result.rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << "# mcsched-timing v1\n";
  csv << "solver,median_seconds,iterations,minimizations_performed,"
         "minimizations_skipped,skip_fraction_iter2,theta\n";
  for (const TimingRow& row : result.rows) {
    csv << row.solver << ',' << format_double(row.median_seconds) << ',' << row.iterations
        << ',' << row.minimizations_performed << ',' << row.minimizations_skipped << ','
        << format_double(row.skip_fraction) << ',' << format_double(row.theta) << '\n';
  }
  result.csv = csv.str();
  return result;
}

std::vector<std::string> dump_policy(const PolicyTable& policy, const SystemConfig& config,
                                     const std::string& out_dir, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  const std::size_t n = config.state_count(kDefaultMaxStates);
  if (policy.size() != n) throw std::invalid_argument("policy table size mismatch");

  {
    std::ostringstream csv;
    csv << "# mcsched-policy v1\n";
    csv << "state";
    if (config.uniform()) {
      for (int m = 1; m <= config.num_contents; ++m) csv << ",q_" << m;
    } else {
      for (int m = 1; m <= config.num_contents; ++m) {
        for (int k = 1; k <= config.num_users; ++k) csv << ",q_" << m << '_' << k;
      }
    }
    csv << ",action\n";
    for (StateIndex s = 0; s < n; ++s) {
      csv << s;
      for (int q : decode_state(s, config)) csv << ',' << q;
      csv << ',' << policy[s] << '\n';
    }
    const std::string path = (fs::path(out_dir) / (stem + "_table.csv")).string();
    write_text_file(path, csv.str());
    written.push_back(path);
  }

  if (config.uniform()) {
    if (verify_switch_structure(policy, config).empty()) {
      const std::vector<SwitchCurve> curves = extract_switch_curves(policy, config);
      for (const SwitchCurve& curve : curves) {
        std::ostringstream csv;
        csv << "# mcsched-switch-curve v1 content=" << curve.content
            << " never=" << curve.never_value << "\n";
        for (int m = 1; m <= config.num_contents; ++m) {
          if (m != curve.content) csv << "q_" << m << ',';
        }
        csv << "threshold\n";
        // Reduced indices enumerate the other queues in state order.
        std::vector<int> radices;
        for (int m = 1; m <= config.num_contents; ++m) {
          if (m != curve.content) radices.push_back(config.caps[static_cast<std::size_t>(m - 1)] + 1);
        }
        for (std::size_t r = 0; r < curve.thresholds.size(); ++r) {
          std::size_t rest = r;
          std::vector<int> digits(radices.size());
          for (std::size_t i = radices.size(); i-- > 0;) {
            digits[i] = static_cast<int>(rest % static_cast<std::size_t>(radices[i]));
            rest /= static_cast<std::size_t>(radices[i]);
          }
          for (int d : digits) csv << d << ',';
          csv << curve.thresholds[r] << '\n';
        }
        const std::string path =
            (fs::path(out_dir) / (stem + "_curve_content" + std::to_string(curve.content) + ".csv"))
                .string();
        write_text_file(path, csv.str());
        written.push_back(path);
      }
    }
  } else {
    for (const PairSwitchCurve& curve : extract_pair_switch_curves(policy, config)) {
      std::ostringstream csv;
      csv << "# mcsched-switch-curve v1 content=" << curve.content << " user=" << curve.user
          << " never=" << curve.never_value << "\n";
      const std::size_t pivot =
          static_cast<std::size_t>(config.slot(curve.content, curve.user));
      std::vector<int> radices;
      for (int m = 1; m <= config.num_contents; ++m) {
        for (int k = 1; k <= config.num_users; ++k) {
          const std::size_t i = static_cast<std::size_t>(config.slot(m, k));
          if (i == pivot) continue;
          csv << "q_" << m << '_' << k << ',';
          radices.push_back(config.caps[i] + 1);
        }
      }
      csv << "threshold\n";
      for (std::size_t r = 0; r < curve.thresholds.size(); ++r) {
        std::size_t rest = r;
        std::vector<int> digits(radices.size());
        for (std::size_t i = radices.size(); i-- > 0;) {
          digits[i] = static_cast<int>(rest % static_cast<std::size_t>(radices[i]));
          rest /= static_cast<std::size_t>(radices[i]);
        }
        for (int d : digits) csv << d << ',';
        csv << curve.thresholds[r] << '\n';
      }
      const std::string path =
          (fs::path(out_dir) / (stem + "_curve_content" + std::to_string(curve.content) + "_user" +
                                std::to_string(curve.user) + ".csv"))
              .string();
      write_text_file(path, csv.str());
      written.push_back(path);
    }
  }
  return written;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

SweepAxes parse_sweeps(const json& j) {
  SweepAxes axes;
  if (j.contains("weight_fetch")) axes.weight_fetch = j.at("weight_fetch").get<std::vector<double>>();
  if (j.contains("weight_power")) axes.weight_power = j.at("weight_power").get<std::vector<double>>();
  if (j.contains("alpha")) axes.alpha = j.at("alpha").get<std::vector<double>>();
  if (j.contains("num_users")) axes.num_users = j.at("num_users").get<std::vector<int>>();
  if (j.contains("threshold")) axes.threshold = j.at("threshold").get<std::vector<int>>();
  return axes;
}

}  // namespace

ExperimentSpec parse_experiment_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentSpec spec;
  if (j.contains("instance_path")) {
    spec.instance = load_instance(j.at("instance_path").get<std::string>());
  } else {
    spec.instance = parse_instance_text(j.at("instance").dump());
  }
  if (j.contains("policies")) spec.policies = j.at("policies").get<std::vector<std::string>>();
  spec.solver = j.value("solver", spec.solver);
  spec.mode = j.value("mode", spec.mode);
  if (j.contains("sweeps")) spec.sweeps = parse_sweeps(j.at("sweeps"));
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    spec.sim.horizon = s.value("horizon", spec.sim.horizon);
    spec.sim.warmup = s.value("warmup", spec.sim.horizon / 10);
    spec.sim.replications = s.value("replications", spec.sim.replications);
    spec.sim.seed = s.value("seed", spec.sim.seed);
  }
  spec.max_states = j.value("max_states", spec.max_states);
  spec.support_cap = j.value("support_cap", spec.support_cap);
  if (j.contains("timing")) {
    const json& t = j.at("timing");
    spec.timing_repeats = t.value("repeats", spec.timing_repeats);
    if (t.contains("solvers")) {
      spec.timing_solvers = t.at("solvers").get<std::vector<std::string>>();
    }
  }
  spec.output = j.value("output", spec.output);
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_text(buffer.str());
}

}  // namespace mcsched
