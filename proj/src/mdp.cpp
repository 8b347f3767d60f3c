#include "mcsched/mdp.hpp"

#include <algorithm>
#include <stdexcept>

#include "mcsched/errors.hpp"

namespace mcsched {

namespace {

// Sort-and-merge row collapse; scratch is reused across rows.
void append_collapsed_row(std::vector<Transition>& scratch,
                          std::vector<Transition>& transitions,
                          std::vector<std::size_t>& offsets) {
  std::sort(scratch.begin(), scratch.end(),
            [](const Transition& a, const Transition& b) { return a.next < b.next; });
  for (std::size_t i = 0; i < scratch.size();) {
    double prob = scratch[i].prob;
    std::size_t j = i + 1;
    while (j < scratch.size() && scratch[j].next == scratch[i].next) {
      prob += scratch[j].prob;
      ++j;
    }
    transitions.push_back({scratch[i].next, prob});
    i = j;
  }
  offsets.push_back(transitions.size());
  scratch.clear();
}

void check_transition_budget(std::size_t states, std::size_t actions, std::size_t support) {
  if (states > kMaxCompiledTransitions / (actions * support)) {
    throw CapacityError("compiled transition table too large",
                        states * actions * support, kMaxCompiledTransitions);
  }
}

// Ascending (u, k) candidates whose predecessor state can imply this state's
// action under the switch structure. Uniform: one candidate per content with
// a pending request. Nonuniform: the decrement must keep the state comparable
// under the partial order, i.e. the removed request sits at or below the
// queue's top occupied user.
void joint_structure_hints(const QueueState& q, const SystemConfig& config,
                           std::vector<std::pair<Action, QueueState>>& out) {
  out.clear();
  QueueState pred = q;
  if (config.uniform()) {
    for (int u = 1; u <= config.num_contents; ++u) {
      const std::size_t i = static_cast<std::size_t>(u - 1);
      if (q[i] == 0) continue;
      pred[i] -= 1;
      out.emplace_back(u, pred);
      pred[i] += 1;
    }
    return;
  }
  for (int u = 1; u <= config.num_contents; ++u) {
    for (int k = 1; k <= config.num_users; ++k) {
      const std::size_t i = static_cast<std::size_t>(config.slot(u, k));
      if (q[i] == 0) continue;
      bool occupied_at_or_above = q[i] >= 2;
      for (int j = k + 1; j <= config.num_users && !occupied_at_or_above; ++j) {
        occupied_at_or_above = q[static_cast<std::size_t>(config.slot(u, j))] > 0;
      }
      if (!occupied_at_or_above) continue;
      pred[i] -= 1;
      out.emplace_back(u, pred);
      pred[i] += 1;
    }
  }
}

}  // namespace

CompiledMdp CompiledMdp::joint(const SystemConfig& config,
                               const ArrivalDistribution& arrivals,
                               std::size_t max_states) {
  config.validate();
  arrivals.validate();
  if (arrivals.outcomes[0].size() != static_cast<std::size_t>(config.slots())) {
    throw std::invalid_argument("arrival outcome layout does not match instance");
  }
  CompiledMdp mdp;
  mdp.num_states_ = config.state_count(max_states);
  mdp.num_actions_ = config.num_contents;
  const std::size_t actions = static_cast<std::size_t>(mdp.num_actions_);
  check_transition_budget(mdp.num_states_, actions, arrivals.size());

  mdp.costs_.resize(mdp.num_states_ * actions);
  mdp.row_offsets_.reserve(mdp.num_states_ * actions + 1);
  mdp.row_offsets_.push_back(0);
  mdp.hint_offsets_.reserve(mdp.num_states_ + 1);
  mdp.hint_offsets_.push_back(0);

  std::vector<Transition> scratch;
  QueueState next, q;
  std::vector<std::pair<Action, QueueState>> hints;
  for (StateIndex s = 0; s < mdp.num_states_; ++s) {
    decode_state_into(s, config, q);
    for (Action u = 1; u <= mdp.num_actions_; ++u) {
      mdp.costs_[s * actions + static_cast<std::size_t>(u - 1)] =
          per_stage_cost(q, u, config).total;
      for (std::size_t i = 0; i < arrivals.size(); ++i) {
        queue_step_into(q, u, arrivals.outcomes[i], config, next);
        scratch.push_back({static_cast<std::uint32_t>(encode_state(next, config)),
                           arrivals.probs[i]});
      }
      append_collapsed_row(scratch, mdp.transitions_, mdp.row_offsets_);
    }
    joint_structure_hints(q, config, hints);
    for (const auto& [u, pred] : hints) {
      mdp.hints_.push_back({u, static_cast<std::uint32_t>(encode_state(pred, config))});
    }
    mdp.hint_offsets_.push_back(mdp.hints_.size());
  }
  return mdp;
}

CompiledMdp CompiledMdp::augmented(const SystemConfig& config,
                                   const MarkovArrivalModel& model,
                                   std::size_t max_states) {
  config.validate();
  validate_markov_model(model);
  for (const ArrivalOutcome& a : model.states) {
    if (a.size() != static_cast<std::size_t>(config.slots())) {
      throw std::invalid_argument("arrival state layout does not match instance");
    }
  }
  const std::size_t queue_states = config.state_count(max_states);
  const std::size_t arrival_states = model.states.size();
  if (queue_states > max_states / arrival_states) {
    throw CapacityError("augmented state space too large",
                        queue_states * arrival_states, max_states);
  }

  CompiledMdp mdp;
  mdp.num_states_ = queue_states * arrival_states;
  mdp.num_actions_ = config.num_contents;
  const std::size_t actions = static_cast<std::size_t>(mdp.num_actions_);
  check_transition_budget(mdp.num_states_, actions, arrival_states);

  mdp.costs_.resize(mdp.num_states_ * actions);
  mdp.row_offsets_.reserve(mdp.num_states_ * actions + 1);
  mdp.row_offsets_.push_back(0);
  mdp.hint_offsets_.reserve(mdp.num_states_ + 1);
  mdp.hint_offsets_.push_back(0);

  std::vector<Transition> scratch;
  QueueState next, q;
  std::vector<std::pair<Action, QueueState>> hints;
  for (std::size_t a = 0; a < arrival_states; ++a) {
    for (StateIndex q_index = 0; q_index < queue_states; ++q_index) {
      const StateIndex s = a * queue_states + q_index;
      decode_state_into(q_index, config, q);
      for (Action u = 1; u <= mdp.num_actions_; ++u) {
        mdp.costs_[s * actions + static_cast<std::size_t>(u - 1)] =
            per_stage_cost(q, u, config).total;
        // The current arrival state is applied deterministically; the
        // expectation runs over the next arrival state.
        queue_step_into(q, u, model.states[a], config, next);
        const std::uint32_t next_q = static_cast<std::uint32_t>(encode_state(next, config));
        for (std::size_t a2 = 0; a2 < arrival_states; ++a2) {
          const double p = model.transition[a][a2];
          if (p > 0.0) {
            scratch.push_back({static_cast<std::uint32_t>(a2 * queue_states) + next_q, p});
          }
        }
        append_collapsed_row(scratch, mdp.transitions_, mdp.row_offsets_);
      }
      joint_structure_hints(q, config, hints);
      for (const auto& [u, pred] : hints) {
        mdp.hints_.push_back(
            {u, static_cast<std::uint32_t>(a * queue_states) +
                    static_cast<std::uint32_t>(encode_state(pred, config))});
      }
      mdp.hint_offsets_.push_back(mdp.hints_.size());
    }
  }
  return mdp;
}

}  // namespace mcsched
