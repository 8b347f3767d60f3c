#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mcsched/arrivals.hpp"
#include "mcsched/mdp.hpp"
#include "mcsched/model.hpp"
#include "mcsched/tables.hpp"

namespace mcsched {

struct SolveOptions {
  int max_iterations = 100'000;
  double span_tolerance = 1e-9;     // span seminorm of successive value differences
  StateIndex reference_state = 0;   // relative values are pinned to 0 here
  bool structured = false;          // use the structured value / policy update
  std::size_t max_states = kDefaultMaxStates;
};

// Per-iteration accounting of full minimizations performed vs skipped by the
// structured update; performed[i] + skipped[i] == |state space| for every i.
struct SweepCounters {
  std::vector<std::size_t> performed;
  std::vector<std::size_t> skipped;

  std::size_t total_performed() const;
  std::size_t total_skipped() const;
  // Cumulative skip fraction over iterations >= first_iteration (1-based).
  double skip_fraction(std::size_t first_iteration = 1) const;
};

struct SolveReport {
  double theta = 0.0;
  ValueTable values;
  PolicyTable policy;
  int iterations = 0;
  bool converged = false;
  SweepCounters counters;
  double wall_seconds = 0.0;
};

// Lowest-index minimizer, treating values within a small relative epsilon of
// the minimum as tied. Every argmin in the toolkit uses this rule so that
// policy tables from different solvers compare exactly.
Action argmin_action(std::span<const double> action_values);

// Exposed for tests: one state's structured value update. Consults the policy
// from the previous sweep via the state's structure hints; falls back to the
// full minimization when no hint fires.
struct ValueUpdateResult {
  double value;
  Action action;
  bool skipped;
};
ValueUpdateResult structured_value_update(const CompiledMdp& mdp, StateIndex s,
                                          const PolicyTable& previous_policy,
                                          std::span<const double> values);

// Core solvers on a compiled MDP. options.structured selects the structured
// variants (SRVIA / SPIA).
SolveReport relative_value_iteration(const CompiledMdp& mdp, const SolveOptions& options);
SolveReport policy_iteration(const CompiledMdp& mdp, const SolveOptions& options);

// Average cost and relative values of a fixed deterministic policy:
// theta + V(s) = g(s,mu(s)) + E[V(s')], V(ref) = 0. Direct dense solve up to
// 4096 states, iterative relative-value evaluation beyond. Validates that the
// induced chain is unichain.
std::pair<double, ValueTable> evaluate_policy(const CompiledMdp& mdp,
                                              const PolicyTable& policy, StateIndex ref);

// Same for a state-independent randomized policy (action probabilities).
std::pair<double, ValueTable> evaluate_randomized(const CompiledMdp& mdp,
                                                  std::span<const double> action_probs,
                                                  StateIndex ref);

// Instance-level entry points.
SolveReport rvia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                 SolveOptions options = {});
SolveReport srvia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                  SolveOptions options = {});
SolveReport pia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                SolveOptions options = {});
SolveReport spia(const SystemConfig& config, const ArrivalDistribution& arrivals,
                 SolveOptions options = {});

// Policy evaluation straight from an instance; accepts tables containing the
// idle pseudo-action.
std::pair<double, ValueTable> policy_evaluate(const PolicyTable& policy,
                                              const SystemConfig& config,
                                              const ArrivalDistribution& arrivals,
                                              StateIndex ref = 0);

// Solver for Markov-modulated arrivals on the augmented state (Q, A).
SolveReport solve_markov_modulated(const SystemConfig& config,
                                   const MarkovArrivalModel& model,
                                   SolveOptions options = {});

// Structural property counters over a converged value table; zero expected.
// Monotonicity along the case's partial order, and the state-action cost
// difference inequality J(Q+e_u,u)-J(Q+e_u,v) <= J(Q,u)-J(Q,v) (with the
// partial-order guard in the nonuniform case).
std::size_t value_monotonicity_violations(const ValueTable& values,
                                          const SystemConfig& config);
std::size_t j_difference_violations(const SystemConfig& config,
                                    const ArrivalDistribution& arrivals,
                                    const ValueTable& values);

}  // namespace mcsched
