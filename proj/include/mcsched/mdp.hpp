#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcsched/arrivals.hpp"
#include "mcsched/model.hpp"

namespace mcsched {

struct Transition {
  std::uint32_t next;
  double prob;
};

// Candidate for the structured update at a state: if the consulted policy
// assigns `action` to `predecessor` (the state minus one request of that
// content, with the nonuniform partial-order guard already applied), the
// switch structure implies `action` here too.
struct StructureHint {
  Action action;
  std::uint32_t predecessor;
};

// Guard against pathological compiled sizes; desk-scale instances are far below.
inline constexpr std::size_t kMaxCompiledTransitions = 200'000'000;

// Tabular average-cost MDP with per-(state,action) stage costs, collapsed
// transition rows, and switch-structure predecessor hints. All solvers
// operate on this form; the joint, augmented (Markov-modulated) and
// brute-force paths share it.
class CompiledMdp {
 public:
  std::size_t num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double cost(StateIndex s, Action u) const {
    return costs_[s * static_cast<std::size_t>(num_actions_) +
                  static_cast<std::size_t>(u - 1)];
  }

  std::span<const Transition> row(StateIndex s, Action u) const {
    const std::size_t i =
        s * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(u - 1);
    return {transitions_.data() + row_offsets_[i],
            row_offsets_[i + 1] - row_offsets_[i]};
  }

  std::span<const StructureHint> hints(StateIndex s) const {
    return {hints_.data() + hint_offsets_[s], hint_offsets_[s + 1] - hint_offsets_[s]};
  }

  // g(s,u) + sum over the row of prob * values[next].
  double backup(StateIndex s, Action u, std::span<const double> values) const {
    double acc = 0.0;
    for (const Transition& t : row(s, u)) acc += t.prob * values[t.next];
    return cost(s, u) + acc;
  }

  static CompiledMdp joint(const SystemConfig& config, const ArrivalDistribution& arrivals,
                           std::size_t max_states = kDefaultMaxStates);

  // Augmented state (arrival state a, queue state q), index a*|Q|+q. The
  // arrival in the current state is applied deterministically; the expectation
  // runs over the next arrival state given the current one.
  static CompiledMdp augmented(const SystemConfig& config, const MarkovArrivalModel& model,
                               std::size_t max_states = kDefaultMaxStates);

 private:
  std::size_t num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> costs_;
  std::vector<std::size_t> row_offsets_;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> hint_offsets_;
  std::vector<StructureHint> hints_;
};

}  // namespace mcsched
