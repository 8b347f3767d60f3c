#pragma once

#include <vector>

#include "mcsched/model.hpp"

namespace mcsched {

// Dense tabular value function over the encoded state space. V(reference) is
// zero after each normalization step.
struct ValueTable {
  std::vector<double> v;
  StateIndex reference = 0;

  double operator[](StateIndex s) const { return v[s]; }
  std::size_t size() const { return v.size(); }
};

// Stationary deterministic policy: action per encoded state. Entries are in
// {1..M}; the threshold baseline may store kIdleAction.
using PolicyTable = std::vector<Action>;

}  // namespace mcsched
