#include "mcsched/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "mcsched/errors.hpp"
#include "detail/chain.hpp"

namespace mcsched {

namespace {

// Relative tie window for every argmin in the toolkit. True ties (symmetric
// instances) resolve to the lowest action index identically across solvers.
constexpr double kTieEps = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct FullMin {
  double value;
  Action action;
};

FullMin full_minimization(const CompiledMdp& mdp, StateIndex s,
                          std::span<const double> values, std::vector<double>& scratch) {
  const int m = mdp.num_actions();
  scratch.resize(static_cast<std::size_t>(m));
  for (Action u = 1; u <= m; ++u) {
    scratch[static_cast<std::size_t>(u - 1)] = mdp.backup(s, u, values);
  }
  const Action a = argmin_action(scratch);
  return {scratch[static_cast<std::size_t>(a - 1)], a};
}

std::pair<double, ValueTable> evaluate_chain(const detail::Chain& chain, StateIndex ref) {
  if (ref >= chain.rows.size()) throw std::invalid_argument("reference state out of range");
  std::pair<double, std::vector<double>> solved = detail::evaluate(chain, ref);
  ValueTable table;
  table.v = std::move(solved.second);
  table.reference = ref;
  return {solved.first, std::move(table)};
}

detail::Chain chain_for_policy(const CompiledMdp& mdp, const PolicyTable& policy) {
  if (policy.size() != mdp.num_states()) {
    throw std::invalid_argument("policy table size mismatch");
  }
  detail::Chain chain;
  chain.rows.resize(mdp.num_states());
  chain.costs.resize(mdp.num_states());
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    const Action u = policy[s];
    if (u < 1 || u > mdp.num_actions()) {
      throw std::invalid_argument("policy entry out of range at state " + std::to_string(s));
    }
    const auto row = mdp.row(s, u);
    chain.rows[s].assign(row.begin(), row.end());
    chain.costs[s] = mdp.cost(s, u);
  }
  return chain;
}

}  // namespace

std::size_t SweepCounters::total_performed() const {
  std::size_t acc = 0;
  for (std::size_t c : performed) acc += c;
  return acc;
}

std::size_t SweepCounters::total_skipped() const {
  std::size_t acc = 0;
  for (std::size_t c : skipped) acc += c;
  return acc;
}

double SweepCounters::skip_fraction(std::size_t first_iteration) const {
  std::size_t done = 0, skip = 0;
  for (std::size_t i = first_iteration - 1; i < performed.size(); ++i) {
    done += performed[i];
    skip += skipped[i];
  }
  return done + skip == 0 ? 0.0 : static_cast<double>(skip) / static_cast<double>(done + skip);
}

Action argmin_action(std::span<const double> action_values) {
  if (action_values.empty()) throw std::invalid_argument("no actions");
  double best = action_values[0];
  for (double v : action_values) best = std::min(best, v);
  const double threshold = best + kTieEps * (1.0 + std::abs(best));
  for (std::size_t u = 0; u < action_values.size(); ++u) {
    if (action_values[u] <= threshold) return static_cast<Action>(u + 1);
  }
  return 1;  // unreachable
}

ValueUpdateResult structured_value_update(const CompiledMdp& mdp, StateIndex s,
                                          const PolicyTable& previous_policy,
                                          std::span<const double> values) {
  if (!previous_policy.empty()) {
    for (const StructureHint& h : mdp.hints(s)) {
      if (previous_policy[h.predecessor] == h.action) {
        return {mdp.backup(s, h.action, values), h.action, true};
      }
    }
  }
  std::vector<double> scratch;
  const FullMin fm = full_minimization(mdp, s, values, scratch);
  return {fm.value, fm.action, false};
}

SolveReport relative_value_iteration(const CompiledMdp& mdp, const SolveOptions& options) {
  const auto t0 = Clock::now();
  const std::size_t n = mdp.num_states();
  if (options.reference_state >= n) throw std::invalid_argument("reference state out of range");

  std::vector<double> v(n, 0.0), v_next(n, 0.0);
  PolicyTable sweep_policy(n, 1), prev_policy(n, 1);
  bool have_prev = false;  // first iteration performs the full minimization everywhere
  std::vector<double> scratch;
  SolveReport report;

  int iter = 0;
  while (iter < options.max_iterations) {
    ++iter;
    std::size_t performed = 0, skipped = 0;
    const bool use_hints = options.structured && have_prev;
    for (StateIndex s = 0; s < n; ++s) {
      bool done = false;
      if (use_hints) {
        for (const StructureHint& h : mdp.hints(s)) {
          if (prev_policy[h.predecessor] == h.action) {
            v_next[s] = mdp.backup(s, h.action, v);
            sweep_policy[s] = h.action;
            ++skipped;
            done = true;
            break;
          }
        }
      }
      if (!done) {
        const FullMin fm = full_minimization(mdp, s, v, scratch);
        v_next[s] = fm.value;
        sweep_policy[s] = fm.action;
        ++performed;
      }
    }
    const double shift = v_next[options.reference_state];
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (StateIndex s = 0; s < n; ++s) {
      v_next[s] -= shift;
      const double d = v_next[s] - v[s];
      hi = std::max(hi, d);
      lo = std::min(lo, d);
    }
    v.swap(v_next);
    prev_policy.swap(sweep_policy);
    have_prev = true;
    report.counters.performed.push_back(performed);
    report.counters.skipped.push_back(skipped);
    if (hi - lo < options.span_tolerance) {
      report.converged = true;
      break;
    }
  }
  report.iterations = iter;

  // Greedy extraction from the converged values; identical tie rule across
  // all solvers so policy tables compare exactly.
  report.policy.resize(n);
  for (StateIndex s = 0; s < n; ++s) {
    report.policy[s] = full_minimization(mdp, s, v, scratch).action;
  }
  report.theta = full_minimization(mdp, options.reference_state, v, scratch).value;
  report.values = ValueTable{std::move(v), options.reference_state};
  report.wall_seconds = seconds_since(t0);
  return report;
}

SolveReport policy_iteration(const CompiledMdp& mdp, const SolveOptions& options) {
  const auto t0 = Clock::now();
  const std::size_t n = mdp.num_states();
  if (options.reference_state >= n) throw std::invalid_argument("reference state out of range");

  PolicyTable policy(n, 1);
  PolicyTable next(n, 1);
  std::set<PolicyTable> visited;  // revisiting a policy other than the current
                                  // fixed point would cycle forever
  std::vector<double> scratch;
  SolveReport report;

  int pass = 0;
  while (pass < options.max_iterations) {
    ++pass;
    if (!visited.insert(policy).second) break;
    auto [theta, values] = evaluate_policy(mdp, policy, options.reference_state);
    report.theta = theta;
    report.values = std::move(values);

    std::size_t performed = 0, skipped = 0;
    for (StateIndex s = 0; s < n; ++s) {
      bool done = false;
      if (options.structured) {
        // Predecessors have smaller indices, so their entries in this pass
        // are already assigned when the sweep reaches s.
        for (const StructureHint& h : mdp.hints(s)) {
          if (next[h.predecessor] == h.action) {
            next[s] = h.action;
            ++skipped;
            done = true;
            break;
          }
        }
      }
      if (!done) {
        next[s] = full_minimization(mdp, s, report.values.v, scratch).action;
        ++performed;
      }
    }
    report.counters.performed.push_back(performed);
    report.counters.skipped.push_back(skipped);
    if (next == policy) {
      report.converged = true;
      break;
    }
    policy = next;
  }
  report.iterations = pass;
  report.policy = std::move(policy);
  report.wall_seconds = seconds_since(t0);
  return report;
}

std::pair<double, ValueTable> evaluate_policy(const CompiledMdp& mdp,
                                              const PolicyTable& policy, StateIndex ref) {
  return evaluate_chain(chain_for_policy(mdp, policy), ref);
}

std::pair<double, ValueTable> evaluate_randomized(const CompiledMdp& mdp,
                                                  std::span<const double> action_probs,
                                                  StateIndex ref) {
  if (action_probs.size() != static_cast<std::size_t>(mdp.num_actions())) {
    throw std::invalid_argument("action probability vector size mismatch");
  }
  double sum = 0.0;
  for (double p : action_probs) {
    if (p < 0.0) throw std::invalid_argument("negative action probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("action probabilities must sum to 1");
  }
  detail::Chain chain;
  chain.rows.resize(mdp.num_states());
  chain.costs.resize(mdp.num_states());
  std::map<std::uint32_t, double> merge;
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    double cost = 0.0;
    for (Action u = 1; u <= mdp.num_actions(); ++u) {
      const double p = action_probs[static_cast<std::size_t>(u - 1)];
      if (p == 0.0) continue;
      cost += p * mdp.cost(s, u);
      for (const Transition& t : mdp.row(s, u)) merge[t.next] += p * t.prob;
    }
    chain.costs[s] = cost;
    chain.rows[s].reserve(merge.size());
    for (const auto& [state, prob] : merge) chain.rows[s].push_back({state, prob});
    merge.clear();
  }
  return evaluate_chain(chain, ref);
}

namespace {

// Instance-level wall clock covers building the tabular MDP too, so solver
// timings compare like for like with the decomposition route (which pays for
// its per-content solves inside its own clock).
template <typename Solver>
SolveReport timed_from_instance(const SystemConfig& config,
                                const ArrivalDistribution& arrivals,
                                const SolveOptions& options, Solver solver) {
  const auto t0 = Clock::now();
  SolveReport report = solver(CompiledMdp::joint(config, arrivals, options.max_states));
  report.wall_seconds = seconds_since(t0);
  return report;
}

}  // namespace

SolveReport rvia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                 SolveOptions options) {
  options.structured = false;
  return timed_from_instance(config, arrivals, options, [&](const CompiledMdp& mdp) {
    return relative_value_iteration(mdp, options);
  });
}

SolveReport srvia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                  SolveOptions options) {
  options.structured = true;
  return timed_from_instance(config, arrivals, options, [&](const CompiledMdp& mdp) {
    return relative_value_iteration(mdp, options);
  });
}

SolveReport pia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                SolveOptions options) {
  options.structured = false;
  return timed_from_instance(config, arrivals, options, [&](const CompiledMdp& mdp) {
    return policy_iteration(mdp, options);
  });
}

SolveReport spia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                 SolveOptions options) {
  options.structured = true;
  return timed_from_instance(config, arrivals, options, [&](const CompiledMdp& mdp) {
    return policy_iteration(mdp, options);
  });
}

std::pair<double, ValueTable> policy_evaluate(const PolicyTable& policy,
                                              const SystemConfig& config,
                                              const ArrivalDistribution& arrivals,
                                              StateIndex ref) {
  config.validate();
  arrivals.validate();
  const std::size_t n = config.state_count(kDefaultMaxStates);
  if (policy.size() != n) throw std::invalid_argument("policy table size mismatch");

  detail::Chain chain;
  chain.rows.resize(n);
  chain.costs.resize(n);
  std::map<std::uint32_t, double> merge;
  QueueState next;
  for (StateIndex s = 0; s < n; ++s) {
    const QueueState q = decode_state(s, config);
    const Action u = policy[s];
    if (u < kIdleAction || u > config.num_contents) {
      throw std::invalid_argument("policy entry out of range at state " + std::to_string(s));
    }
    chain.costs[s] = per_stage_cost(q, u, config).total;
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      queue_step_into(q, u, arrivals.outcomes[i], config, next);
      merge[static_cast<std::uint32_t>(encode_state(next, config))] += arrivals.probs[i];
    }
    chain.rows[s].reserve(merge.size());
    for (const auto& [state, prob] : merge) chain.rows[s].push_back({state, prob});
    merge.clear();
  }
  return evaluate_chain(chain, ref);
}

SolveReport solve_markov_modulated(const SystemConfig& config,
                                   const MarkovArrivalModel& model, SolveOptions options) {
  return relative_value_iteration(CompiledMdp::augmented(config, model, options.max_states),
                                  options);
}

namespace {

constexpr double kIneqSlack = 1e-9;
constexpr std::size_t kPairwiseLimit = 2000;

}  // namespace

std::size_t value_monotonicity_violations(const ValueTable& values,
                                          const SystemConfig& config) {
  const std::size_t n = config.state_count(kDefaultMaxStates);
  if (values.size() != n) throw std::invalid_argument("value table size mismatch");
  std::vector<QueueState> states(n);
  for (StateIndex s = 0; s < n; ++s) states[s] = decode_state(s, config);

  std::size_t violations = 0;
  const bool uniform = config.uniform();
  if (n <= kPairwiseLimit) {
    for (StateIndex a = 0; a < n; ++a) {
      for (StateIndex b = 0; b < n; ++b) {
        if (a == b) continue;
        const bool comparable = uniform ? dominates(states[a], states[b])
                                        : dominates_partial(states[a], states[b], config);
        if (comparable && values[a] < values[b] - kIneqSlack) ++violations;
      }
    }
    return violations;
  }
  // Single increments generate the order transitively; equivalent check.
  for (StateIndex s = 0; s < n; ++s) {
    const QueueState& q = states[s];
    for (int i = 0; i < config.slots(); ++i) {
      if (q[static_cast<std::size_t>(i)] >= config.caps[static_cast<std::size_t>(i)]) continue;
      QueueState up = q;
      up[static_cast<std::size_t>(i)] += 1;
      if (!uniform && !dominates_partial(up, q, config)) continue;
      if (values[encode_state(up, config)] < values[s] - kIneqSlack) ++violations;
    }
  }
  return violations;
}

std::size_t j_difference_violations(const SystemConfig& config,
                                    const ArrivalDistribution& arrivals,
                                    const ValueTable& values) {
  const CompiledMdp mdp = CompiledMdp::joint(config, arrivals);
  const std::size_t n = mdp.num_states();
  if (values.size() != n) throw std::invalid_argument("value table size mismatch");
  const int m = config.num_contents;

  std::vector<double> j(n * static_cast<std::size_t>(m));
  for (StateIndex s = 0; s < n; ++s) {
    for (Action u = 1; u <= m; ++u) {
      j[s * static_cast<std::size_t>(m) + static_cast<std::size_t>(u - 1)] =
          mdp.backup(s, u, values.v);
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
      const int user_span = config.uniform() ? 1 : config.num_users;
      for (int k = 1; k <= user_span; ++k) {
        const std::size_t i = static_cast<std::size_t>(config.slot(u, k));
        if (q[i] >= config.caps[i]) continue;
        if (!config.uniform() && top_requester(q, u, config) < k) continue;  // keep comparable
        up = q;
        up[i] += 1;
        const StateIndex s2 = encode_state(up, config);
        for (Action v = 1; v <= m; ++v) {
          if (v == u) continue;
          if (j_at(s2, u) - j_at(s2, v) > j_at(s, u) - j_at(s, v) + kIneqSlack) ++violations;
        }
      }
    }
  }
  return violations;
}

}  // namespace mcsched
