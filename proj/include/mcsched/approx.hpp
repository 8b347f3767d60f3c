#pragma once

#include <cstddef>
#include <vector>

#include "mcsched/arrivals.hpp"
#include "mcsched/model.hpp"
#include "mcsched/tables.hpp"

namespace mcsched {

// State-independent randomized policy over the actions 1..M.
struct BasePolicy {
  std::vector<double> prob;

  void validate(const SystemConfig& config) const;
};

// Base policy drawing actions from the Zipf popularity distribution.
BasePolicy zipf_base_policy(const SystemConfig& config, double alpha);

// Value function and average cost of one content's queue under a randomized
// base policy. The per-content state space is {0..N_m} (uniform) or the
// product over users of {0..N_{m,k}} (nonuniform), mixed-radix encoded like
// the joint space; the reference state is the empty queue.
struct PerContentValue {
  std::vector<double> value;
  double theta = 0.0;
};

PerContentValue per_content_solve(const BasePolicy& base, int m,
                                  const SystemConfig& config,
                                  const ArrivalDistribution& arrivals);

// Slot layout of one content's queue within the joint state.
struct ContentLayout {
  std::size_t first_slot = 0;
  std::vector<int> caps;

  std::size_t encode_from_joint(const QueueState& joint) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      index = index * (static_cast<std::size_t>(caps[i]) + 1) +
              static_cast<std::size_t>(joint[first_slot + i]);
    }
    return index;
  }
};

// All per-content solves plus the expected-next-value lookups the SSA sweep
// needs: expected_keep[m][q] = E[V_m(q plus arrivals, capped)] and
// expected_serve[m] = the same from the emptied queue.
struct Decomposition {
  std::vector<PerContentValue> per_content;
  std::vector<ContentLayout> layouts;
  std::vector<std::vector<double>> expected_keep;
  std::vector<double> expected_serve;

  double theta_sum() const;
};

Decomposition decompose(const BasePolicy& base, const SystemConfig& config,
                        const ArrivalDistribution& arrivals);

// The approximate state-action cost g(Q,u) + sum_m E[V_m(Q_m')].
double j_hat(const Decomposition& decomp, const SystemConfig& config,
             const QueueState& state, Action u);
Action ssa_action(const Decomposition& decomp, const SystemConfig& config,
                  const QueueState& state);

struct SsaReport {
  PolicyTable policy;
  Decomposition decomposition;
  std::size_t minimizations_performed = 0;
  std::size_t minimizations_skipped = 0;
  double wall_seconds = 0.0;
};

// Dense suboptimal policy table built with the structured sweep (predecessor
// skips with the nonuniform partial-order guard, lowest-index ties).
SsaReport ssa_report(const SystemConfig& config, const ArrivalDistribution& arrivals,
                     const BasePolicy& base,
                     std::size_t max_states = kDefaultMaxStates);
PolicyTable ssa(const SystemConfig& config, const ArrivalDistribution& arrivals,
                const BasePolicy& base, std::size_t max_states = kDefaultMaxStates);

// Myopic baseline: minimizes w_f f(u) + w_p p(Q,u) - (queued requests for u).
Action myopic_action(const SystemConfig& config, const QueueState& state);
PolicyTable myopic_policy(const SystemConfig& config,
                          std::size_t max_states = kDefaultMaxStates);

// Max absolute residual of sum_m V_m in the joint base-policy fixed point,
// with the average cost read off at the reference (all-zeros) state.
double decomposition_residual(const Decomposition& decomp, const BasePolicy& base,
                              const SystemConfig& config,
                              const ArrivalDistribution& arrivals);

// States where some action pair induces identical transition rows; strict
// improvement of the greedy policy over its base cannot be certified there.
std::vector<StateIndex> transition_distinctness_violations(
    const SystemConfig& config, const ArrivalDistribution& arrivals,
    std::size_t max_states = kDefaultMaxStates);

// Analog of the state-action difference inequality for j_hat; zero expected.
std::size_t j_hat_difference_violations(const Decomposition& decomp,
                                        const SystemConfig& config);

}  // namespace mcsched
