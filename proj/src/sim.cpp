#include "mcsched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mcsched/errors.hpp"
#include "detail/chain.hpp"

namespace mcsched {

namespace {

// Stationary component averages for per-state action distributions given by
// `act`, which appends (action, weight) pairs for a state.
template <typename ActionsFn>
CostBreakdown stationary_breakdown(const SystemConfig& config,
                                   const ArrivalDistribution& arrivals, ActionsFn act) {
  const std::size_t n = config.state_count(kDefaultMaxStates);
  std::vector<std::vector<Transition>> rows(n);
  std::vector<std::pair<Action, double>> actions;
  std::map<std::uint32_t, double> merge;
  QueueState next;
  for (StateIndex s = 0; s < n; ++s) {
    const QueueState q = decode_state(s, config);
    actions.clear();
    act(s, q, actions);
    for (const auto& [u, weight] : actions) {
      for (std::size_t i = 0; i < arrivals.size(); ++i) {
        queue_step_into(q, u, arrivals.outcomes[i], config, next);
        merge[static_cast<std::uint32_t>(encode_state(next, config))] +=
            weight * arrivals.probs[i];
      }
    }
    rows[s].reserve(merge.size());
    for (const auto& [state, prob] : merge) rows[s].push_back({state, prob});
    merge.clear();
  }
  const std::vector<double> pi = detail::stationary(rows);

  double delay = 0.0, power = 0.0, fetch = 0.0;
  for (StateIndex s = 0; s < n; ++s) {
    if (pi[s] == 0.0) continue;
    const QueueState q = decode_state(s, config);
    actions.clear();
    act(s, q, actions);
    for (const auto& [u, weight] : actions) {
      const CostBreakdown g = per_stage_cost(q, u, config);
      delay += pi[s] * weight * g.delay;
      power += pi[s] * weight * g.power;
      fetch += pi[s] * weight * g.fetch;
    }
  }
  return make_breakdown(delay, power, fetch, config);
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, int replication) {
  SplitMix64 mixer(seed ^ (0xA0761D6478BD642Full * static_cast<std::uint64_t>(replication + 1)));
  return mixer.next();
}

SimOptions default_sim_options(long horizon, int replications, std::uint64_t seed) {
  SimOptions options;
  options.horizon = horizon;
  options.warmup = horizon / 10;
  options.replications = replications;
  options.seed = seed;
  return options;
}

RandomPolicyHandle::RandomPolicyHandle(const BasePolicy& base) {
  cdf_.reserve(base.prob.size());
  double acc = 0.0;
  for (double p : base.prob) {
    acc += p;
    cdf_.push_back(acc);
  }
  if (cdf_.empty() || std::abs(cdf_.back() - 1.0) > 1e-12) {
    throw std::invalid_argument("base policy distribution not normalized");
  }
  cdf_.back() = 1.0;
}

Action RandomPolicyHandle::act(const QueueState&, SplitMix64& rng) const {
  const double x = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x);
  return static_cast<Action>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                      static_cast<std::ptrdiff_t>(cdf_.size()) - 1) +
                             1);
}

SimResult simulate(const PolicyHandle& policy, const SystemConfig& config,
                   const ArrivalDistribution& arrivals, const SimOptions& options) {
  config.validate();
  arrivals.validate();
  if (options.horizon <= options.warmup || options.warmup < 0) {
    throw std::invalid_argument("horizon must exceed warmup >= 0");
  }
  if (options.replications < 1) throw std::invalid_argument("need at least one replication");

  std::vector<double> cdf;
  cdf.reserve(arrivals.size());
  double acc = 0.0;
  for (double p : arrivals.probs) {
    acc += p;
    cdf.push_back(acc);
  }
  cdf.back() = 1.0;

  SimResult result;
  result.replications.reserve(static_cast<std::size_t>(options.replications));
  const long measured = options.horizon - options.warmup;
  QueueState next;
  for (int r = 0; r < options.replications; ++r) {
    SplitMix64 rng(replication_seed(options.seed, r));
    QueueState q(static_cast<std::size_t>(config.slots()), 0);
    double delay = 0.0, power = 0.0, fetch = 0.0;
    for (long t = 0; t < options.horizon; ++t) {
      const Action u = policy.act(q, rng);
      if (t >= options.warmup) {
        const CostBreakdown g = per_stage_cost(q, u, config);
        delay += g.delay;
        power += g.power;
        fetch += g.fetch;
      }
      const double x = rng.uniform();
      const std::size_t pick = static_cast<std::size_t>(
          std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
      const ArrivalOutcome& a = arrivals.outcomes[std::min(pick, arrivals.size() - 1)];
      queue_step_into(q, u, a, config, next);
      q.swap(next);
    }
    result.replications.push_back(make_breakdown(delay / static_cast<double>(measured),
                                                 power / static_cast<double>(measured),
                                                 fetch / static_cast<double>(measured),
                                                 config));
  }

  const double n = static_cast<double>(options.replications);
  auto mean_of = [&](auto component) {
    double m = 0.0;
    for (const CostBreakdown& b : result.replications) m += component(b);
    return m / n;
  };
  auto stderr_of = [&](auto component, double mean) {
    if (options.replications < 2) return 0.0;
    double var = 0.0;
    for (const CostBreakdown& b : result.replications) {
      const double d = component(b) - mean;
      var += d * d;
    }
    return std::sqrt(var / (n - 1.0) / n);
  };
  const double delay = mean_of([](const CostBreakdown& b) { return b.delay; });
  const double power = mean_of([](const CostBreakdown& b) { return b.power; });
  const double fetch = mean_of([](const CostBreakdown& b) { return b.fetch; });
  result.mean = make_breakdown(delay, power, fetch, config);
  result.stderr_of_mean.delay = stderr_of([](const CostBreakdown& b) { return b.delay; }, delay);
  result.stderr_of_mean.power = stderr_of([](const CostBreakdown& b) { return b.power; }, power);
  result.stderr_of_mean.fetch = stderr_of([](const CostBreakdown& b) { return b.fetch; }, fetch);
  result.stderr_of_mean.total = stderr_of([](const CostBreakdown& b) { return b.total; },
                                          result.mean.total);
  return result;
}

CostBreakdown exact_average_cost(const PolicyTable& policy, const SystemConfig& config,
                                 const ArrivalDistribution& arrivals) {
  config.validate();
  arrivals.validate();
  const std::size_t n = config.state_count(kDefaultMaxStates);
  if (policy.size() != n) throw std::invalid_argument("policy table size mismatch");
  return stationary_breakdown(config, arrivals,
                              [&](StateIndex s, const QueueState&,
                                  std::vector<std::pair<Action, double>>& out) {
                                out.emplace_back(policy[s], 1.0);
                              });
}

CostBreakdown exact_average_cost_randomized(const BasePolicy& base,
                                            const SystemConfig& config,
                                            const ArrivalDistribution& arrivals) {
  config.validate();
  arrivals.validate();
  base.validate(config);
  return stationary_breakdown(config, arrivals,
                              [&](StateIndex, const QueueState&,
                                  std::vector<std::pair<Action, double>>& out) {
                                for (std::size_t u = 0; u < base.prob.size(); ++u) {
                                  if (base.prob[u] > 0.0) {
                                    out.emplace_back(static_cast<Action>(u + 1), base.prob[u]);
                                  }
                                }
                              });
}

}  // namespace mcsched
