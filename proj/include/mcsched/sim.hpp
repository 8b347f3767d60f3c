#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mcsched/approx.hpp"
#include "mcsched/arrivals.hpp"
#include "mcsched/model.hpp"
#include "mcsched/tables.hpp"

namespace mcsched {

// SplitMix64: output n is a fixed 64-bit mix of (seed + n * golden gamma).
// Named, seedable and counter-based, so replication streams are reproducible
// across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Stream seed for one replication of a run.
std::uint64_t replication_seed(std::uint64_t seed, int replication);

struct SimOptions {
  long horizon = 100'000;  // T slots per replication
  long warmup = 10'000;    // slots discarded before averaging, default T/10
  int replications = 1;
  std::uint64_t seed = 0;
};

SimOptions default_sim_options(long horizon, int replications = 1,
                               std::uint64_t seed = 0);

// A policy the simulator can drive: deterministic tables, on-the-fly
// functional policies (myopic, LQF, SSA at large scale) and stochastic
// baselines all fit.
class PolicyHandle {
 public:
  virtual ~PolicyHandle() = default;
  virtual Action act(const QueueState& state, SplitMix64& rng) const = 0;
};

class TablePolicyHandle final : public PolicyHandle {
 public:
  TablePolicyHandle(PolicyTable table, const SystemConfig& config)
      : table_(std::move(table)), config_(&config) {}
  Action act(const QueueState& state, SplitMix64&) const override {
    return table_[encode_state(state, *config_)];
  }

 private:
  PolicyTable table_;
  const SystemConfig* config_;
};

class FunctionPolicyHandle final : public PolicyHandle {
 public:
  explicit FunctionPolicyHandle(std::function<Action(const QueueState&)> fn)
      : fn_(std::move(fn)) {}
  Action act(const QueueState& state, SplitMix64&) const override { return fn_(state); }

 private:
  std::function<Action(const QueueState&)> fn_;
};

// Per-slot action sampled from a state-independent base distribution.
class RandomPolicyHandle final : public PolicyHandle {
 public:
  explicit RandomPolicyHandle(const BasePolicy& base);
  Action act(const QueueState& state, SplitMix64& rng) const override;

 private:
  std::vector<double> cdf_;
};

struct SimResult {
  CostBreakdown mean;
  CostBreakdown stderr_of_mean;
  std::vector<CostBreakdown> replications;
};

// Monte Carlo trajectory average from the all-zeros state; bit-reproducible
// for a fixed seed. Replication r uses the stream replication_seed(seed, r).
SimResult simulate(const PolicyHandle& policy, const SystemConfig& config,
                   const ArrivalDistribution& arrivals, const SimOptions& options);

// Exact long-run component averages from the stationary distribution of the
// induced chain. Accepts tables containing the idle pseudo-action.
CostBreakdown exact_average_cost(const PolicyTable& policy, const SystemConfig& config,
                                 const ArrivalDistribution& arrivals);

// Same for a state-independent randomized base policy.
CostBreakdown exact_average_cost_randomized(const BasePolicy& base,
                                            const SystemConfig& config,
                                            const ArrivalDistribution& arrivals);

}  // namespace mcsched
