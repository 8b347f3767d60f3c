#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mcsched {

// Content, user and action ids are 1-based in the public API, matching the
// instance-file format; internal vectors are 0-based.

using StateIndex = std::size_t;

// Multicast action: the content scheduled this slot, 1..M. Action 0 is an
// idle pseudo-action accepted by the dynamics and cost helpers (no queue is
// served, no power or fetching is charged). It is used only by the threshold
// baseline; the optimizing solvers never emit it.
using Action = int;
inline constexpr Action kIdleAction = 0;

enum class CaseKind { kUniform, kNonuniform };

// Complete instance description: contents, users, cache set, queue caps,
// costs and weights.
//
// Queue layout: one slot per content (uniform) or one slot per (content,
// user) pair in content-major order, slot(m,k) = (m-1)*K + (k-1)
// (nonuniform). QueueState, ArrivalOutcome and the state encoding all share
// this layout.
struct SystemConfig {
  int num_contents = 0;  // M
  int num_users = 1;     // K
  CaseKind case_kind = CaseKind::kUniform;
  std::vector<int> cached;         // sorted 1-based content ids, subset of {1..M}
  std::vector<int> caps;           // N_m per content, or N_{m,k} per slot
  std::vector<double> fetch_base;  // c(m), M entries
  std::vector<double> power;       // p(m), M entries, or p(m,k) per slot
  double weight_fetch = 0.0;       // w_f
  double weight_power = 0.0;       // w_p

  bool uniform() const { return case_kind == CaseKind::kUniform; }
  int slots() const { return uniform() ? num_contents : num_contents * num_users; }
  int slot(int m, int k = 1) const {
    return uniform() ? m - 1 : (m - 1) * num_users + (k - 1);
  }
  bool is_cached(Action m) const;
  double power_of(int m, int k = 1) const {
    return uniform() ? power[static_cast<std::size_t>(m - 1)]
                     : power[static_cast<std::size_t>(slot(m, k))];
  }

  // Number of in-range queue states, prod over slots of (cap+1).
  // Throws CapacityError if the product overflows or exceeds max_states.
  std::size_t state_count(std::size_t max_states) const;

  void validate() const;  // throws std::invalid_argument on a broken instance
};

inline constexpr std::size_t kDefaultMaxStates = 5'000'000;

// Request-counter vector (uniform) or flattened matrix (nonuniform); the MDP
// state. Entry i must lie in [0, caps[i]].
using QueueState = std::vector<int>;

// Per-slot request arrivals, same layout as QueueState.
using ArrivalOutcome = std::vector<int>;

// Per-stage cost split into its components; total = delay + w_f*fetch + w_p*power.
struct CostBreakdown {
  double delay = 0.0;
  double power = 0.0;
  double fetch = 0.0;
  double total = 0.0;
};

CostBreakdown make_breakdown(double delay, double power, double fetch,
                             const SystemConfig& config);

// Mixed-radix state encoding with the first slot most significant
// (content-major order), radix caps[i]+1 per slot. decode(encode(q)) == q.
StateIndex encode_state(const QueueState& state, const SystemConfig& config);
QueueState decode_state(StateIndex index, const SystemConfig& config);
void decode_state_into(StateIndex index, const SystemConfig& config, QueueState& out);

// 1(u not cached) * c(u); charged whenever u is scheduled, regardless of
// queue occupancy. Zero for the idle pseudo-action.
double fetch_cost(Action u, const SystemConfig& config);

// Worst-channel user with pending requests for content u, max{k : Q_{u,k}>0},
// or 0 when no user has a pending request. Nonuniform case only.
int top_requester(const QueueState& state, Action u, const SystemConfig& config);

// Uniform: p(u) unconditionally. Nonuniform: p(u, k_top) for the worst
// pending requester, 0 when content u has no pending request (empty-max
// convention). Zero for the idle pseudo-action.
double power_cost(const QueueState& state, Action u, const SystemConfig& config);

CostBreakdown per_stage_cost(const QueueState& state, Action u,
                             const SystemConfig& config);

// One slot of queue dynamics: the scheduled content's queue slots are emptied,
// then arrivals are added and capped.
QueueState queue_step(const QueueState& state, Action u,
                      const ArrivalOutcome& arrival, const SystemConfig& config);
void queue_step_into(const QueueState& state, Action u,
                     const ArrivalOutcome& arrival, const SystemConfig& config,
                     QueueState& out);

// Componentwise >= (the uniform-case partial order).
bool dominates(const QueueState& a, const QueueState& b);

// Nonuniform partial order: per content, extra requests are allowed only at
// users within the occupied range of b's queue; entries beyond it must match.
bool dominates_partial(const QueueState& a, const QueueState& b,
                       const SystemConfig& config);

struct ValueTable;        // solvers.hpp
struct ArrivalDistribution;  // arrivals.hpp

// E[V(Q')] over the arrival distribution, the expectation term of the Bellman
// backup. Throws std::invalid_argument if the distribution is not normalized.
double transition_expectation(const ValueTable& values, const QueueState& state,
                              Action u, const ArrivalDistribution& arrivals,
                              const SystemConfig& config);

}  // namespace mcsched
