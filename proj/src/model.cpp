#include "mcsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mcsched/arrivals.hpp"
#include "mcsched/errors.hpp"
#include "mcsched/tables.hpp"

namespace mcsched {

bool SystemConfig::is_cached(Action m) const {
  return std::binary_search(cached.begin(), cached.end(), m);
}

std::size_t SystemConfig::state_count(std::size_t max_states) const {
  std::size_t count = 1;
  for (int cap : caps) {
    const std::size_t radix = static_cast<std::size_t>(cap) + 1;
    if (count > max_states / radix + 1) {
      throw CapacityError("state space too large", 0, max_states);
    }
    count *= radix;
  }
  if (count > max_states) {
    throw CapacityError("state space too large", count, max_states);
  }
  return count;
}

void SystemConfig::validate() const {
  if (num_contents < 1) throw std::invalid_argument("num_contents must be >= 1");
  if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
  const std::size_t want = static_cast<std::size_t>(slots());
  if (caps.size() != want) throw std::invalid_argument("caps size mismatch");
  if (power.size() != want) throw std::invalid_argument("power size mismatch");
  if (fetch_base.size() != static_cast<std::size_t>(num_contents)) {
    throw std::invalid_argument("fetch_base size mismatch");
  }
  for (int cap : caps) {
    if (cap < 1) throw std::invalid_argument("queue caps must be >= 1");
  }
  for (double c : fetch_base) {
    if (c < 0) throw std::invalid_argument("fetch costs must be >= 0");
  }
  for (double p : power) {
    if (p < 0) throw std::invalid_argument("powers must be >= 0");
  }
  if (weight_fetch < 0 || weight_power < 0) {
    throw std::invalid_argument("weights must be >= 0");
  }
  if (!std::is_sorted(cached.begin(), cached.end())) {
    throw std::invalid_argument("cached set must be sorted");
  }
  for (int m : cached) {
    if (m < 1 || m > num_contents) throw std::invalid_argument("cached id out of range");
  }
  if (std::adjacent_find(cached.begin(), cached.end()) != cached.end()) {
    throw std::invalid_argument("cached set has duplicates");
  }
  if (!uniform()) {
    // Users are indexed by non-increasing channel gain, so per-content powers
    // are non-decreasing in the user index.
    for (int m = 1; m <= num_contents; ++m) {
      for (int k = 2; k <= num_users; ++k) {
        if (power_of(m, k) < power_of(m, k - 1)) {
          throw std::invalid_argument("power must be non-decreasing in user index for content " +
                                      std::to_string(m));
        }
      }
    }
  }
}

CostBreakdown make_breakdown(double delay, double power, double fetch,
                             const SystemConfig& config) {
  CostBreakdown b;
  b.delay = delay;
  b.power = power;
  b.fetch = fetch;
  b.total = delay + config.weight_fetch * fetch + config.weight_power * power;
  return b;
}

StateIndex encode_state(const QueueState& state, const SystemConfig& config) {
  if (state.size() != static_cast<std::size_t>(config.slots())) {
    throw std::out_of_range("queue state has wrong number of slots");
  }
  StateIndex index = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const int cap = config.caps[i];
    if (state[i] < 0 || state[i] > cap) {
      throw std::out_of_range("queue entry " + std::to_string(i) + " out of range");
    }
    index = index * static_cast<StateIndex>(cap + 1) + static_cast<StateIndex>(state[i]);
  }
  return index;
}

void decode_state_into(StateIndex index, const SystemConfig& config, QueueState& out) {
  out.resize(static_cast<std::size_t>(config.slots()));
  for (std::size_t i = out.size(); i-- > 0;) {
    const StateIndex radix = static_cast<StateIndex>(config.caps[i]) + 1;
    out[i] = static_cast<int>(index % radix);
    index /= radix;
  }
  if (index != 0) throw std::out_of_range("state index out of range");
}

QueueState decode_state(StateIndex index, const SystemConfig& config) {
  QueueState state;
  decode_state_into(index, config, state);
  return state;
}

double fetch_cost(Action u, const SystemConfig& config) {
  if (u == kIdleAction) return 0.0;
  if (u < 1 || u > config.num_contents) throw std::out_of_range("action out of range");
  return config.is_cached(u) ? 0.0 : config.fetch_base[static_cast<std::size_t>(u - 1)];
}

int top_requester(const QueueState& state, Action u, const SystemConfig& config) {
  for (int k = config.num_users; k >= 1; --k) {
    if (state[static_cast<std::size_t>(config.slot(u, k))] > 0) return k;
  }
  return 0;
}

double power_cost(const QueueState& state, Action u, const SystemConfig& config) {
  if (u == kIdleAction) return 0.0;
  if (u < 1 || u > config.num_contents) throw std::out_of_range("action out of range");
  if (config.uniform()) return config.power_of(u);
  const int k = top_requester(state, u, config);
  return k == 0 ? 0.0 : config.power_of(u, k);
}

CostBreakdown per_stage_cost(const QueueState& state, Action u,
                             const SystemConfig& config) {
  double delay = 0.0;
  for (int q : state) delay += q;
  return make_breakdown(delay, power_cost(state, u, config), fetch_cost(u, config),
                        config);
}

void queue_step_into(const QueueState& state, Action u,
                     const ArrivalOutcome& arrival, const SystemConfig& config,
                     QueueState& out) {
  out.resize(state.size());
  const int span = config.uniform() ? 1 : config.num_users;
  const int lo = u == kIdleAction ? -1 : config.slot(u, 1);
  const int hi = u == kIdleAction ? -1 : lo + span;  // served slots [lo, hi)
  for (int i = 0; i < static_cast<int>(state.size()); ++i) {
    const int kept = (i >= lo && i < hi) ? 0 : state[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] =
        std::min(kept + arrival[static_cast<std::size_t>(i)],
                 config.caps[static_cast<std::size_t>(i)]);
  }
}

QueueState queue_step(const QueueState& state, Action u,
                      const ArrivalOutcome& arrival, const SystemConfig& config) {
  QueueState out;
  queue_step_into(state, u, arrival, config, out);
  return out;
}

bool dominates(const QueueState& a, const QueueState& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
  }
  return true;
}

bool dominates_partial(const QueueState& a, const QueueState& b,
                       const SystemConfig& config) {
  for (int m = 1; m <= config.num_contents; ++m) {
    const int top = top_requester(b, m, config);
    for (int k = 1; k <= config.num_users; ++k) {
      const std::size_t i = static_cast<std::size_t>(config.slot(m, k));
      if (k <= top ? a[i] < b[i] : a[i] != b[i]) return false;
    }
  }
  return true;
}

double transition_expectation(const ValueTable& values, const QueueState& state,
                              Action u, const ArrivalDistribution& arrivals,
                              const SystemConfig& config) {
  arrivals.validate();
  double acc = 0.0;
  QueueState next;
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    queue_step_into(state, u, arrivals.outcomes[i], config, next);
    acc += arrivals.probs[i] * values[encode_state(next, config)];
  }
  return acc;
}

}  // namespace mcsched
