#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mcsched/approx.hpp"
#include "mcsched/model.hpp"
#include "mcsched/tables.hpp"

namespace mcsched {

// A state where the switch implication mu(Q)=u => mu(Q+e_u)=u fails.
struct SwitchViolation {
  StateIndex state;
  Action action;
};

// Uniform case: checks the switch implication at every in-range state and
// content-successor. Empty result means the policy has the switch structure.
std::vector<SwitchViolation> verify_switch_structure(const PolicyTable& policy,
                                                     const SystemConfig& config);

// Nonuniform case: the implication is checked only where the incremented
// state stays comparable under the partial order (increments at a user beyond
// the occupied range are exempt).
std::vector<SwitchViolation> verify_partial_switch_structure(const PolicyTable& policy,
                                                             const SystemConfig& config);

// Markov-modulated case: the uniform switch implication within each arrival
// state's slice of the augmented policy, indexed a*|Q|+q.
std::vector<SwitchViolation> verify_markov_switch_structure(
    const PolicyTable& policy, const SystemConfig& config,
    std::size_t num_arrival_states);

// Per-content switch curve: least queue length at which the policy schedules
// the content, per configuration of the other queues (reduced mixed-radix
// index). cap+1 is the never-scheduled sentinel, also used in CSV output.
struct SwitchCurve {
  Action content = 1;
  std::vector<int> thresholds;
  int never_value = 0;  // N_u + 1
};

class StructureViolationError : public std::runtime_error {
 public:
  explicit StructureViolationError(std::vector<SwitchViolation> violations)
      : std::runtime_error("policy does not have the switch structure (" +
                           std::to_string(violations.size()) + " violations)"),
        violations_(std::move(violations)) {}

  const std::vector<SwitchViolation>& violations() const { return violations_; }

 private:
  std::vector<SwitchViolation> violations_;
};

// Uniform case; refuses (StructureViolationError) if the policy fails
// verify_switch_structure.
std::vector<SwitchCurve> extract_switch_curves(const PolicyTable& policy,
                                               const SystemConfig& config);

// Inverse of extraction for switch-structured policies.
PolicyTable rebuild_from_curves(const std::vector<SwitchCurve>& curves,
                                const SystemConfig& config);

// Non-decreasing thresholds (sentinel = top element). Intended for the
// two-content uniform case where the reduced space is one-dimensional.
bool verify_monotone_curve(const SwitchCurve& curve);

// Per-(content,user) thresholds for the nonuniform case, scanned directly
// from the table (dump/plotting aid; no structure precondition).
struct PairSwitchCurve {
  int content = 1;
  int user = 1;
  std::vector<int> thresholds;
  int never_value = 0;
};
std::vector<PairSwitchCurve> extract_pair_switch_curves(const PolicyTable& policy,
                                                        const SystemConfig& config);

// Number of two-content policies with monotonically non-decreasing switch
// curves: binomial(N1+N2+2, N1+1), computed exactly. Throws on overflow.
unsigned long long count_monotone_policies(int n1, int n2);

// Longest-queue-first baseline (row sums in the nonuniform case).
PolicyTable baseline_lqf(const SystemConfig& config,
                         std::size_t max_states = kDefaultMaxStates);
Action lqf_action(const SystemConfig& config, const QueueState& state);

// Threshold baseline: schedules the lowest-index content whose queued
// requests (row sum in the nonuniform case) meet its threshold; when none
// qualifies the entry is the idle pseudo-action (no service, delay-only
// stage cost).
PolicyTable baseline_threshold(const SystemConfig& config,
                               const std::vector<int>& thresholds,
                               std::size_t max_states = kDefaultMaxStates);
Action threshold_action(const SystemConfig& config, const std::vector<int>& thresholds,
                        const QueueState& state);

}  // namespace mcsched
