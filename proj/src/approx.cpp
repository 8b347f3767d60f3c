#include "mcsched/approx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mcsched/errors.hpp"
#include "mcsched/mdp.hpp"
#include "mcsched/solvers.hpp"
#include "detail/chain.hpp"

namespace mcsched {

namespace {

// Mixed-radix space of one content's queue slots, encoded like the joint
// space restricted to that content.
struct ContentSpace {
  std::vector<int> caps;
  std::size_t count = 1;
  std::size_t first_slot = 0;

  ContentSpace(const SystemConfig& config, int m) {
    const int span = config.uniform() ? 1 : config.num_users;
    first_slot = static_cast<std::size_t>(config.slot(m, 1));
    for (int k = 0; k < span; ++k) {
      caps.push_back(config.caps[first_slot + static_cast<std::size_t>(k)]);
      count *= static_cast<std::size_t>(caps.back()) + 1;
    }
  }

  std::size_t encode(const std::vector<int>& q) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      index = index * (static_cast<std::size_t>(caps[i]) + 1) + static_cast<std::size_t>(q[i]);
    }
    return index;
  }

  std::size_t encode_from_joint(const QueueState& joint) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      index = index * (static_cast<std::size_t>(caps[i]) + 1) +
              static_cast<std::size_t>(joint[first_slot + i]);
    }
    return index;
  }

  std::vector<int> decode(std::size_t index) const {
    std::vector<int> q(caps.size());
    for (std::size_t i = caps.size(); i-- > 0;) {
      const std::size_t radix = static_cast<std::size_t>(caps[i]) + 1;
      q[i] = static_cast<int>(index % radix);
      index /= radix;
    }
    return q;
  }

  // Ripple increment in encode order (last slot least significant).
  void advance(std::vector<int>& q) const {
    for (std::size_t i = caps.size(); i-- > 0;) {
      if (q[i] < caps[i]) {
        ++q[i];
        return;
      }
      q[i] = 0;
    }
  }
};

void step_content_queue_into(const std::vector<int>& q, bool served,
                             const std::vector<int>& arrival,
                             const std::vector<int>& caps, std::vector<int>& out) {
  out.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out[i] = std::min((served ? 0 : q[i]) + arrival[i], caps[i]);
  }
}

}  // namespace

void BasePolicy::validate(const SystemConfig& config) const {
  if (prob.size() != static_cast<std::size_t>(config.num_contents)) {
    throw std::invalid_argument("base policy size mismatch");
  }
  double sum = 0.0;
  bool any = false;
  for (double p : prob) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("base policy probability out of [0,1]");
    sum += p;
    any = any || p > 0.0;
  }
  if (!any || std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("base policy must be a distribution over actions");
  }
}

BasePolicy zipf_base_policy(const SystemConfig& config, double alpha) {
  BasePolicy base;
  base.prob = zipf_pmf(config.num_contents, alpha);
  return base;
}

namespace {

PerContentValue per_content_solve_impl(const BasePolicy& base, int m,
                                       const SystemConfig& config,
                                       const ArrivalDistribution& marginal) {
  const ContentSpace space(config, m);
  if (space.count > detail::kDenseSolveLimit) {
    throw CapacityError("per-content state space too large for the direct solve",
                        space.count, detail::kDenseSolveLimit);
  }
  const double p_serve = base.prob[static_cast<std::size_t>(m - 1)];

  // Serving empties the queue, so the serve branch's transition row is the
  // same for every state: the law of min(A, caps).
  std::vector<Transition> serve_row;
  {
    std::vector<double> dense(space.count, 0.0);
    std::vector<int> next;
    const std::vector<int> zero(space.caps.size(), 0);
    for (std::size_t i = 0; i < marginal.size(); ++i) {
      step_content_queue_into(zero, true, marginal.outcomes[i], space.caps, next);
      dense[space.encode(next)] += marginal.probs[i];
    }
    for (std::size_t t = 0; t < dense.size(); ++t) {
      if (dense[t] != 0.0) serve_row.push_back({static_cast<std::uint32_t>(t), dense[t]});
    }
  }

  // The fetch term of E[g_m] does not depend on the state; the power term
  // contributes only when this content itself is scheduled.
  double fetch_mix = 0.0;
  for (Action u = 1; u <= config.num_contents; ++u) {
    fetch_mix += base.prob[static_cast<std::size_t>(u - 1)] * fetch_cost(u, config);
  }
  fetch_mix *= config.weight_fetch;

  detail::Chain chain;
  chain.rows.resize(space.count);
  chain.costs.resize(space.count);
  std::vector<double> dense(space.count, 0.0);
  std::vector<int> next;
  std::vector<int> q(space.caps.size(), 0);
  for (std::size_t s = 0; s < space.count; ++s, space.advance(q)) {
    double queued = 0.0;
    for (int e : q) queued += e;
    double power_term = 0.0;
    if (p_serve > 0.0) {
      if (config.uniform()) {
        power_term = config.power_of(m);
      } else {
        for (int k = static_cast<int>(q.size()); k >= 1; --k) {
          if (q[static_cast<std::size_t>(k - 1)] > 0) {
            power_term = config.power_of(m, k);
            break;
          }
        }
      }
    }
    chain.costs[s] = queued + fetch_mix + config.weight_power * p_serve * power_term;

    if (p_serve < 1.0) {
      for (std::size_t i = 0; i < marginal.size(); ++i) {
        step_content_queue_into(q, false, marginal.outcomes[i], space.caps, next);
        dense[space.encode(next)] += (1.0 - p_serve) * marginal.probs[i];
      }
    }
    if (p_serve > 0.0) {
      for (const Transition& t : serve_row) dense[t.next] += p_serve * t.prob;
    }
    for (std::size_t t = 0; t < dense.size(); ++t) {
      if (dense[t] != 0.0) {
        chain.rows[s].push_back({static_cast<std::uint32_t>(t), dense[t]});
        dense[t] = 0.0;
      }
    }
  }

  auto [theta, values] = detail::evaluate(chain, 0);
  PerContentValue out;
  out.theta = theta;
  out.value = std::move(values);
  return out;
}

}  // namespace

PerContentValue per_content_solve(const BasePolicy& base, int m,
                                  const SystemConfig& config,
                                  const ArrivalDistribution& arrivals) {
  config.validate();
  base.validate(config);
  if (m < 1 || m > config.num_contents) throw std::invalid_argument("content out of range");
  return per_content_solve_impl(base, m, config, marginal_for_content(arrivals, config, m));
}

double Decomposition::theta_sum() const {
  double acc = 0.0;
  for (const PerContentValue& pc : per_content) acc += pc.theta;
  return acc;
}

Decomposition decompose(const BasePolicy& base, const SystemConfig& config,
                        const ArrivalDistribution& arrivals) {
  config.validate();
  base.validate(config);
  Decomposition decomp;
  decomp.per_content.reserve(static_cast<std::size_t>(config.num_contents));
  decomp.expected_keep.resize(static_cast<std::size_t>(config.num_contents));
  decomp.expected_serve.resize(static_cast<std::size_t>(config.num_contents));
  decomp.layouts.resize(static_cast<std::size_t>(config.num_contents));
  for (int m = 1; m <= config.num_contents; ++m) {
    const ContentSpace space(config, m);
    decomp.layouts[static_cast<std::size_t>(m - 1)] = {space.first_slot, space.caps};
    const ArrivalDistribution marginal = marginal_for_content(arrivals, config, m);
    decomp.per_content.push_back(per_content_solve_impl(base, m, config, marginal));
    const std::vector<double>& value = decomp.per_content[static_cast<std::size_t>(m - 1)].value;
    std::vector<double>& keep = decomp.expected_keep[static_cast<std::size_t>(m - 1)];
    keep.assign(space.count, 0.0);
    std::vector<int> next;
    std::vector<int> q(space.caps.size(), 0);
    for (std::size_t s = 0; s < space.count; ++s, space.advance(q)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < marginal.size(); ++i) {
        step_content_queue_into(q, false, marginal.outcomes[i], space.caps, next);
        acc += marginal.probs[i] * value[space.encode(next)];
      }
      keep[s] = acc;
    }
    decomp.expected_serve[static_cast<std::size_t>(m - 1)] = keep[0];
  }
  return decomp;
}

double j_hat(const Decomposition& decomp, const SystemConfig& config,
             const QueueState& state, Action u) {
  double acc = per_stage_cost(state, u, config).total;
  for (int m = 1; m <= config.num_contents; ++m) {
    const std::size_t i = static_cast<std::size_t>(m - 1);
    acc += m == u ? decomp.expected_serve[i]
                  : decomp.expected_keep[i][decomp.layouts[i].encode_from_joint(state)];
  }
  return acc;
}

Action ssa_action(const Decomposition& decomp, const SystemConfig& config,
                  const QueueState& state) {
  std::vector<double> j(static_cast<std::size_t>(config.num_contents));
  for (Action u = 1; u <= config.num_contents; ++u) {
    j[static_cast<std::size_t>(u - 1)] = j_hat(decomp, config, state, u);
  }
  return argmin_action(j);
}

SsaReport ssa_report(const SystemConfig& config, const ArrivalDistribution& arrivals,
                     const BasePolicy& base, std::size_t max_states) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  const std::size_t n = config.state_count(max_states);

  SsaReport report;
  report.decomposition = decompose(base, config, arrivals);
  report.policy.assign(n, kIdleAction);

  // Same-sweep predecessor skips: predecessors have smaller indices, so their
  // entries are already assigned when the ascending sweep reaches a state.
  // A one-request decrement at slot i is an index offset of the slot's
  // mixed-radix weight.
  const std::size_t slots = static_cast<std::size_t>(config.slots());
  std::vector<StateIndex> stride(slots, 1);
  for (std::size_t i = slots - 1; i-- > 0;) {
    stride[i] = stride[i + 1] * static_cast<StateIndex>(config.caps[i + 1] + 1);
  }
  const int span = config.uniform() ? 1 : config.num_users;

  QueueState q(slots, 0);
  std::vector<double> j(static_cast<std::size_t>(config.num_contents));
  for (StateIndex s = 0; s < n; ++s) {
    Action chosen = kIdleAction;
    for (int u = 1; u <= config.num_contents && chosen == kIdleAction; ++u) {
      for (int k = 1; k <= span; ++k) {
        const std::size_t i = static_cast<std::size_t>(config.slot(u, k));
        if (q[i] == 0) continue;
        if (!config.uniform()) {
          // Partial-order guard: the removed request must sit at or below the
          // top occupied user of the decremented queue.
          bool occupied_at_or_above = q[i] >= 2;
          for (int v = k + 1; v <= config.num_users && !occupied_at_or_above; ++v) {
            occupied_at_or_above = q[static_cast<std::size_t>(config.slot(u, v))] > 0;
          }
          if (!occupied_at_or_above) continue;
        }
        if (report.policy[s - stride[i]] == u) {
          chosen = u;
          break;
        }
      }
    }
    if (chosen != kIdleAction) {
      report.policy[s] = chosen;
      ++report.minimizations_skipped;
    } else {
      for (Action u = 1; u <= config.num_contents; ++u) {
        j[static_cast<std::size_t>(u - 1)] = j_hat(report.decomposition, config, q, u);
      }
      report.policy[s] = argmin_action(j);
      ++report.minimizations_performed;
    }
    // Ripple increment keeps q in step with s (last slot least significant).
    for (std::size_t i = slots; i-- > 0;) {
      if (q[i] < config.caps[i]) {
        ++q[i];
        break;
      }
      q[i] = 0;
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

PolicyTable ssa(const SystemConfig& config, const ArrivalDistribution& arrivals,
                const BasePolicy& base, std::size_t max_states) {
  return ssa_report(config, arrivals, base, max_states).policy;
}

Action myopic_action(const SystemConfig& config, const QueueState& state) {
  std::vector<double> c(static_cast<std::size_t>(config.num_contents));
  for (Action u = 1; u <= config.num_contents; ++u) {
    double queued = 0.0;
    const int span = config.uniform() ? 1 : config.num_users;
    for (int k = 1; k <= span; ++k) {
      queued += state[static_cast<std::size_t>(config.slot(u, k))];
    }
    c[static_cast<std::size_t>(u - 1)] = config.weight_fetch * fetch_cost(u, config) +
                                         config.weight_power * power_cost(state, u, config) -
                                         queued;
  }
  return argmin_action(c);
}

PolicyTable myopic_policy(const SystemConfig& config, std::size_t max_states) {
  config.validate();
  const std::size_t n = config.state_count(max_states);
  PolicyTable policy(n);
  for (StateIndex s = 0; s < n; ++s) {
    policy[s] = myopic_action(config, decode_state(s, config));
  }
  return policy;
}

double decomposition_residual(const Decomposition& decomp, const BasePolicy& base,
                              const SystemConfig& config,
                              const ArrivalDistribution& arrivals) {
  config.validate();
  base.validate(config);
  arrivals.validate();
  const std::size_t n = config.state_count(kDefaultMaxStates);

  std::vector<ContentSpace> spaces;
  for (int m = 1; m <= config.num_contents; ++m) spaces.emplace_back(config, m);

  auto lhs_minus_value = [&](const QueueState& q) {
    // E over the base policy of [g(Q,u) + E V_hat(Q')] minus V_hat(Q).
    double acc = 0.0;
    for (Action u = 1; u <= config.num_contents; ++u) {
      const double pu = base.prob[static_cast<std::size_t>(u - 1)];
      if (pu > 0.0) acc += pu * j_hat(decomp, config, q, u);
    }
    for (int m = 1; m <= config.num_contents; ++m) {
      acc -= decomp.per_content[static_cast<std::size_t>(m - 1)]
                 .value[spaces[static_cast<std::size_t>(m - 1)].encode_from_joint(q)];
    }
    return acc;
  };

  const double theta = lhs_minus_value(QueueState(static_cast<std::size_t>(config.slots()), 0));
  double worst = 0.0;
  for (StateIndex s = 0; s < n; ++s) {
    const double r = lhs_minus_value(decode_state(s, config)) - theta;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

std::vector<StateIndex> transition_distinctness_violations(
    const SystemConfig& config, const ArrivalDistribution& arrivals,
    std::size_t max_states) {
  const CompiledMdp mdp = CompiledMdp::joint(config, arrivals, max_states);
  std::vector<StateIndex> violations;
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    bool distinct = true;
    for (Action u = 1; u <= mdp.num_actions() && distinct; ++u) {
      for (Action v = u + 1; v <= mdp.num_actions() && distinct; ++v) {
        const auto row_u = mdp.row(s, u);
        const auto row_v = mdp.row(s, v);
        if (row_u.size() != row_v.size()) continue;
        bool equal = true;
        for (std::size_t i = 0; i < row_u.size() && equal; ++i) {
          equal = row_u[i].next == row_v[i].next &&
                  std::abs(row_u[i].prob - row_v[i].prob) <= 1e-12;
        }
        if (equal) distinct = false;
      }
    }
    if (!distinct) violations.push_back(s);
  }
  return violations;
}

std::size_t j_hat_difference_violations(const Decomposition& decomp,
                                        const SystemConfig& config) {
  const std::size_t n = config.state_count(kDefaultMaxStates);
  const int m = config.num_contents;
  constexpr double kSlack = 1e-9;

  std::vector<double> j(n * static_cast<std::size_t>(m));
  for (StateIndex s = 0; s < n; ++s) {
    const QueueState q = decode_state(s, config);
    for (Action u = 1; u <= m; ++u) {
      j[s * static_cast<std::size_t>(m) + static_cast<std::size_t>(u - 1)] =
          j_hat(decomp, config, q, u);
    }
  }
  auto j_at = [&](StateIndex s, Action u) {
    return j[s * static_cast<std::size_t>(m) + static_cast<std::size_t>(u - 1)];
  };

  std::size_t violations = 0;
  QueueState up;
  for (StateIndex s = 0; s < n; ++s) {
    const QueueState q = decode_state(s, config);
    for (Action u = 1; u <= m; ++u) {
      const int span = config.uniform() ? 1 : config.num_users;
      for (int k = 1; k <= span; ++k) {
        const std::size_t i = static_cast<std::size_t>(config.slot(u, k));
        if (q[i] >= config.caps[i]) continue;
        if (!config.uniform() && top_requester(q, u, config) < k) continue;
        up = q;
        up[i] += 1;
        const StateIndex s2 = encode_state(up, config);
        for (Action v = 1; v <= m; ++v) {
          if (v == u) continue;
          if (j_at(s2, u) - j_at(s2, v) > j_at(s, u) - j_at(s, v) + kSlack) ++violations;
        }
      }
    }
  }
  return violations;
}

}  // namespace mcsched
