#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mcsched/model.hpp"

namespace mcsched {

inline constexpr std::size_t kDefaultSupportCap = 100'000;

// Finite joint distribution of per-slot request arrivals. Outcomes are
// distinct, probabilities are in (0,1] and sum to 1 within 1e-12.
struct ArrivalDistribution {
  std::vector<ArrivalOutcome> outcomes;
  std::vector<double> probs;
  std::vector<int> max_entries;  // declared per-slot maxima

  std::size_t size() const { return outcomes.size(); }
  void validate() const;  // throws std::invalid_argument
};

ArrivalDistribution point_mass(ArrivalOutcome outcome);

// Zipf popularity over contents: P_m proportional to m^{-alpha}, normalized.
std::vector<double> zipf_pmf(int num_contents, double alpha);

// Each of the K users independently requests exactly one content per slot
// with content probabilities zipf_pmf(M, alpha). The joint support is
// enumerated and collapsed; for the uniform case the collapsed per-content
// aggregate is multinomial(K, P).
ArrivalDistribution per_user_zipf_arrivals(const SystemConfig& config, double alpha,
                                           std::size_t support_cap = kDefaultSupportCap);

// One scalar distribution per queue slot, (value, probability) pairs.
using ScalarDistribution = std::vector<std::pair<int, double>>;

// Cartesian-product joint distribution of independent per-slot arrivals.
ArrivalDistribution independent_product(const std::vector<ScalarDistribution>& per_queue,
                                        std::size_t support_cap = kDefaultSupportCap);

// Marginal of the joint distribution onto content m's slots (identical
// restrictions merged).
ArrivalDistribution marginal_for_content(const ArrivalDistribution& joint,
                                         const SystemConfig& config, int m);

// Finite-state arrival chain: each state is a full ArrivalOutcome, rows of
// the transition matrix are stochastic and the chain is ergodic.
struct MarkovArrivalModel {
  std::vector<ArrivalOutcome> states;
  std::vector<std::vector<double>> transition;
};

struct MarkovValidationReport {
  std::vector<double> stationary;
};

// Confirms row-stochasticity and ergodicity (irreducible + aperiodic) and
// returns the stationary distribution. Throws ErgodicityError otherwise.
MarkovValidationReport validate_markov_model(const MarkovArrivalModel& model);

}  // namespace mcsched
