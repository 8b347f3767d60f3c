#pragma once

// Internal shared machinery for finite Markov chains with per-state costs:
// unichain validation, average-cost evaluation, stationary distributions.

#include <cstdint>
#include <utility>
#include <vector>

#include "mcsched/errors.hpp"
#include "mcsched/mdp.hpp"
#include "detail/graph.hpp"
#include "detail/linalg.hpp"

namespace mcsched::detail {

struct Chain {
  std::vector<std::vector<Transition>> rows;
  std::vector<double> costs;
};

inline void check_unichain(const std::vector<std::vector<Transition>>& rows) {
  const ClosedClasses closed = closed_classes_of_rows(rows);
  if (closed.representatives.size() != 1) {
    throw UnichainViolationError(closed.representatives.at(0), closed.representatives.at(1));
  }
}

inline constexpr std::size_t kDenseSolveLimit = 4096;
inline constexpr double kEvalSpanTol = 1e-10;
inline constexpr int kEvalMaxIters = 2'000'000;

// Iterative relative-value evaluation with the standard aperiodicity
// transformation (tau-damped backups keep the original fixed point).
inline std::pair<double, std::vector<double>> iterative_evaluation(const Chain& chain,
                                                                   std::size_t ref) {
  const std::size_t n = chain.rows.size();
  constexpr double tau = 0.5;
  std::vector<double> v(n, 0.0), w(n);
  for (int iter = 0; iter < kEvalMaxIters; ++iter) {
    for (std::size_t s = 0; s < n; ++s) {
      double acc = 0.0;
      for (const Transition& t : chain.rows[s]) acc += t.prob * v[t.next];
      w[s] = (1.0 - tau) * v[s] + tau * (chain.costs[s] + acc);
    }
    const double shift = w[ref];
    double hi = -1e300, lo = 1e300;
    for (std::size_t s = 0; s < n; ++s) {
      w[s] -= shift;
      const double d = w[s] - v[s];
      hi = hi < d ? d : hi;
      lo = lo > d ? d : lo;
    }
    v.swap(w);
    if (hi - lo < kEvalSpanTol) break;
  }
  double acc = 0.0;
  for (const Transition& t : chain.rows[ref]) acc += t.prob * v[t.next];
  return {chain.costs[ref] + acc, std::move(v)};
}

// theta + V(s) = g(s) + E[V(s')], V(ref) = 0; validates unichain first.
inline std::pair<double, std::vector<double>> evaluate(const Chain& chain, std::size_t ref) {
  check_unichain(chain.rows);
  return chain.rows.size() <= kDenseSolveLimit
             ? solve_evaluation(chain.rows, std::span<const double>(chain.costs), ref)
             : iterative_evaluation(chain, ref);
}

inline std::vector<double> stationary(const std::vector<std::vector<Transition>>& rows) {
  check_unichain(rows);
  if (rows.size() <= kDenseSolveLimit) return solve_stationary(rows, rows.size());
  // Damped power iteration; the half-step keeps periodic chains convergent.
  const std::size_t n = rows.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int iter = 0; iter < kEvalMaxIters; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      for (const Transition& t : rows[s]) next[t.next] += pi[s] * t.prob;
    }
    double diff = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      next[s] = 0.5 * next[s] + 0.5 * pi[s];
      diff += next[s] > pi[s] ? next[s] - pi[s] : pi[s] - next[s];
    }
    pi.swap(next);
    if (diff < 1e-13) break;
  }
  return pi;
}

}  // namespace mcsched::detail
