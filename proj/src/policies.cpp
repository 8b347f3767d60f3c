#include "mcsched/policies.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "mcsched/errors.hpp"

namespace mcsched {

namespace {

void check_table(const PolicyTable& policy, const SystemConfig& config,
                 std::size_t num_states) {
  if (policy.size() != num_states) throw std::invalid_argument("policy table size mismatch");
  for (Action u : policy) {
    if (u < kIdleAction || u > config.num_contents) {
      throw std::invalid_argument("policy entry out of range");
    }
  }
}

// Mixed-radix space of the queues other than content u (uniform case), in
// state order with content u's digit removed.
struct ReducedSpace {
  std::vector<int> radices;
  std::size_t count = 1;

  explicit ReducedSpace(const SystemConfig& config, int u) {
    for (int m = 1; m <= config.num_contents; ++m) {
      if (m == u) continue;
      radices.push_back(config.caps[static_cast<std::size_t>(m - 1)] + 1);
      count *= static_cast<std::size_t>(radices.back());
    }
  }

  // Writes the decoded configuration into the full queue state, leaving
  // content u's entry untouched.
  void fill(std::size_t index, int u, QueueState& q) const {
    for (std::size_t i = radices.size(); i-- > 0;) {
      const int value = static_cast<int>(index % static_cast<std::size_t>(radices[i]));
      index /= static_cast<std::size_t>(radices[i]);
      const int m = static_cast<int>(i) + 1 <= u - 1 ? static_cast<int>(i) + 1
                                                     : static_cast<int>(i) + 2;
      q[static_cast<std::size_t>(m - 1)] = value;
    }
  }
};

}  // namespace

std::vector<SwitchViolation> verify_switch_structure(const PolicyTable& policy,
                                                     const SystemConfig& config) {
  config.validate();
  if (!config.uniform()) throw std::invalid_argument("switch verifier is for the uniform case");
  const std::size_t n = config.state_count(kDefaultMaxStates);
  check_table(policy, config, n);

  std::vector<SwitchViolation> violations;
  for (StateIndex s = 0; s < n; ++s) {
    const Action u = policy[s];
    if (u == kIdleAction) continue;
    QueueState q = decode_state(s, config);
    const std::size_t i = static_cast<std::size_t>(u - 1);
    if (q[i] >= config.caps[i]) continue;
    q[i] += 1;
    if (policy[encode_state(q, config)] != u) violations.push_back({s, u});
  }
  return violations;
}

std::vector<SwitchViolation> verify_partial_switch_structure(const PolicyTable& policy,
                                                             const SystemConfig& config) {
  config.validate();
  if (config.uniform()) {
    throw std::invalid_argument("partial switch verifier is for the nonuniform case");
  }
  const std::size_t n = config.state_count(kDefaultMaxStates);
  check_table(policy, config, n);

  std::vector<SwitchViolation> violations;
  QueueState up;
  for (StateIndex s = 0; s < n; ++s) {
    const Action u = policy[s];
    if (u == kIdleAction) continue;
    const QueueState q = decode_state(s, config);
    const int top = top_requester(q, u, config);
    for (int k = 1; k <= top; ++k) {  // increments beyond the occupied range are exempt
      const std::size_t i = static_cast<std::size_t>(config.slot(u, k));
      if (q[i] >= config.caps[i]) continue;
      up = q;
      up[i] += 1;
      if (policy[encode_state(up, config)] != u) {
        violations.push_back({s, u});
        break;
      }
    }
  }
  return violations;
}

std::vector<SwitchViolation> verify_markov_switch_structure(
    const PolicyTable& policy, const SystemConfig& config,
    std::size_t num_arrival_states) {
  config.validate();
  const std::size_t q_states = config.state_count(kDefaultMaxStates);
  if (policy.size() != q_states * num_arrival_states) {
    throw std::invalid_argument("augmented policy table size mismatch");
  }
  std::vector<SwitchViolation> violations;
  for (std::size_t a = 0; a < num_arrival_states; ++a) {
    const PolicyTable slice(policy.begin() + static_cast<std::ptrdiff_t>(a * q_states),
                            policy.begin() + static_cast<std::ptrdiff_t>((a + 1) * q_states));
    for (SwitchViolation v :
         config.uniform() ? verify_switch_structure(slice, config)
                          : verify_partial_switch_structure(slice, config)) {
      violations.push_back({a * q_states + v.state, v.action});
    }
  }
  return violations;
}

std::vector<SwitchCurve> extract_switch_curves(const PolicyTable& policy,
                                               const SystemConfig& config) {
  std::vector<SwitchViolation> violations = verify_switch_structure(policy, config);
  if (!violations.empty()) throw StructureViolationError(std::move(violations));

  std::vector<SwitchCurve> curves;
  for (int u = 1; u <= config.num_contents; ++u) {
    const ReducedSpace reduced(config, u);
    SwitchCurve curve;
    curve.content = u;
    curve.never_value = config.caps[static_cast<std::size_t>(u - 1)] + 1;
    curve.thresholds.assign(reduced.count, curve.never_value);
    QueueState q(static_cast<std::size_t>(config.slots()), 0);
    for (std::size_t r = 0; r < reduced.count; ++r) {
      reduced.fill(r, u, q);
      for (int qu = 0; qu < curve.never_value; ++qu) {
        q[static_cast<std::size_t>(u - 1)] = qu;
        if (policy[encode_state(q, config)] == u) {
          curve.thresholds[r] = qu;
          break;
        }
      }
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

PolicyTable rebuild_from_curves(const std::vector<SwitchCurve>& curves,
                                const SystemConfig& config) {
  const std::size_t n = config.state_count(kDefaultMaxStates);
  PolicyTable policy(n, kIdleAction);
  QueueState q(static_cast<std::size_t>(config.slots()), 0);
  for (const SwitchCurve& curve : curves) {
    const int u = curve.content;
    const ReducedSpace reduced(config, u);
    if (curve.thresholds.size() != reduced.count) {
      throw std::invalid_argument("switch curve has wrong shape");
    }
    for (std::size_t r = 0; r < reduced.count; ++r) {
      reduced.fill(r, u, q);
      for (int qu = curve.thresholds[r];
           qu <= config.caps[static_cast<std::size_t>(u - 1)]; ++qu) {
        q[static_cast<std::size_t>(u - 1)] = qu;
        policy[encode_state(q, config)] = u;
      }
    }
  }
  for (Action a : policy) {
    if (a == kIdleAction) throw std::invalid_argument("curves do not cover the state space");
  }
  return policy;
}

bool verify_monotone_curve(const SwitchCurve& curve) {
  for (std::size_t i = 1; i < curve.thresholds.size(); ++i) {
    if (curve.thresholds[i] < curve.thresholds[i - 1]) return false;
  }
  return true;
}

std::vector<PairSwitchCurve> extract_pair_switch_curves(const PolicyTable& policy,
                                                        const SystemConfig& config) {
  config.validate();
  if (config.uniform()) {
    throw std::invalid_argument("pair curves are for the nonuniform case");
  }
  const std::size_t n = config.state_count(kDefaultMaxStates);
  check_table(policy, config, n);

  std::vector<PairSwitchCurve> curves;
  for (int u = 1; u <= config.num_contents; ++u) {
    for (int k = 1; k <= config.num_users; ++k) {
      const std::size_t pivot = static_cast<std::size_t>(config.slot(u, k));
      PairSwitchCurve curve;
      curve.content = u;
      curve.user = k;
      curve.never_value = config.caps[pivot] + 1;

      std::vector<int> radices;
      std::size_t count = 1;
      for (std::size_t i = 0; i < static_cast<std::size_t>(config.slots()); ++i) {
        if (i == pivot) continue;
        radices.push_back(config.caps[i] + 1);
        count *= static_cast<std::size_t>(radices.back());
      }
      curve.thresholds.assign(count, curve.never_value);
      QueueState q(static_cast<std::size_t>(config.slots()), 0);
      for (std::size_t r = 0; r < count; ++r) {
        std::size_t rest = r;
        for (std::size_t i = radices.size(); i-- > 0;) {
          const std::size_t slot = i < pivot ? i : i + 1;
          q[slot] = static_cast<int>(rest % static_cast<std::size_t>(radices[i]));
          rest /= static_cast<std::size_t>(radices[i]);
        }
        for (int qv = 0; qv < curve.never_value; ++qv) {
          q[pivot] = qv;
          if (policy[encode_state(q, config)] == u) {
            curve.thresholds[r] = qv;
            break;
          }
        }
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

unsigned long long count_monotone_policies(int n1, int n2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("queue caps must be >= 1");
  const int n = n1 + n2 + 2;
  const int k = std::min(n1 + 1, n2 + 1);
  unsigned __int128 result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned __int128>(n - k + i);
    result /= static_cast<unsigned __int128>(i);  // exact: prefix products are binomials
    if (result > std::numeric_limits<unsigned long long>::max()) {
      throw std::overflow_error("monotone policy count exceeds 64 bits");
    }
  }
  return static_cast<unsigned long long>(result);
}

Action lqf_action(const SystemConfig& config, const QueueState& state) {
  Action best = 1;
  long best_sum = -1;
  for (int m = 1; m <= config.num_contents; ++m) {
    long sum = 0;
    const int span = config.uniform() ? 1 : config.num_users;
    for (int k = 1; k <= span; ++k) sum += state[static_cast<std::size_t>(config.slot(m, k))];
    if (sum > best_sum) {
      best_sum = sum;
      best = m;
    }
  }
  return best;
}

PolicyTable baseline_lqf(const SystemConfig& config, std::size_t max_states) {
  config.validate();
  const std::size_t n = config.state_count(max_states);
  PolicyTable policy(n);
  for (StateIndex s = 0; s < n; ++s) {
    policy[s] = lqf_action(config, decode_state(s, config));
  }
  return policy;
}

Action threshold_action(const SystemConfig& config, const std::vector<int>& thresholds,
                        const QueueState& state) {
  if (thresholds.size() != static_cast<std::size_t>(config.num_contents)) {
    throw std::invalid_argument("one threshold per content required");
  }
  for (int m = 1; m <= config.num_contents; ++m) {
    long sum = 0;
    const int span = config.uniform() ? 1 : config.num_users;
    for (int k = 1; k <= span; ++k) sum += state[static_cast<std::size_t>(config.slot(m, k))];
    if (sum >= thresholds[static_cast<std::size_t>(m - 1)]) return m;
  }
  return kIdleAction;
}

PolicyTable baseline_threshold(const SystemConfig& config,
                               const std::vector<int>& thresholds,
                               std::size_t max_states) {
  config.validate();
  const std::size_t n = config.state_count(max_states);
  PolicyTable policy(n);
  for (StateIndex s = 0; s < n; ++s) {
    policy[s] = threshold_action(config, thresholds, decode_state(s, config));
  }
  return policy;
}

}  // namespace mcsched
