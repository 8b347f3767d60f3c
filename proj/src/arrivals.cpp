#include "mcsched/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mcsched/errors.hpp"
#include "detail/graph.hpp"
#include "detail/linalg.hpp"

namespace mcsched {

namespace {

constexpr double kProbTolerance = 1e-12;

ArrivalDistribution from_map(std::map<ArrivalOutcome, double> support,
                             std::vector<int> max_entries) {
  ArrivalDistribution dist;
  dist.max_entries = std::move(max_entries);
  dist.outcomes.reserve(support.size());
  dist.probs.reserve(support.size());
  for (auto& [outcome, prob] : support) {
    if (prob <= 0.0) continue;
    dist.outcomes.push_back(outcome);
    dist.probs.push_back(prob);
  }
  dist.validate();
  return dist;
}

}  // namespace

void ArrivalDistribution::validate() const {
  if (outcomes.size() != probs.size()) {
    throw std::invalid_argument("arrival outcomes/probs size mismatch");
  }
  if (outcomes.empty()) throw std::invalid_argument("empty arrival distribution");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0 || probs[i] > 1.0) {
      throw std::invalid_argument("arrival probability out of (0,1]");
    }
    sum += probs[i];
    if (outcomes[i].size() != outcomes[0].size()) {
      throw std::invalid_argument("arrival outcomes have mixed sizes");
    }
    for (std::size_t j = 0; j < outcomes[i].size(); ++j) {
      if (outcomes[i][j] < 0) throw std::invalid_argument("negative arrival entry");
      if (!max_entries.empty() && outcomes[i][j] > max_entries[j]) {
        throw std::invalid_argument("arrival entry exceeds declared maximum");
      }
    }
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    throw std::invalid_argument("arrival probabilities sum to " + std::to_string(sum));
  }
}

ArrivalDistribution point_mass(ArrivalOutcome outcome) {
  ArrivalDistribution dist;
  dist.max_entries = outcome;
  dist.outcomes.push_back(std::move(outcome));
  dist.probs.push_back(1.0);
  dist.validate();
  return dist;
}

std::vector<double> zipf_pmf(int num_contents, double alpha) {
  if (num_contents < 1) throw std::invalid_argument("zipf needs at least one content");
  if (alpha < 0) throw std::invalid_argument("zipf exponent must be >= 0");
  std::vector<double> pmf(static_cast<std::size_t>(num_contents));
  double norm = 0.0;
  for (int m = 1; m <= num_contents; ++m) {
    pmf[static_cast<std::size_t>(m - 1)] = std::pow(static_cast<double>(m), -alpha);
    norm += pmf[static_cast<std::size_t>(m - 1)];
  }
  for (double& p : pmf) p /= norm;
  return pmf;
}

namespace {

// Multinomial aggregate over contents for the uniform case: enumerate all
// compositions of K requests into M contents.
void enumerate_compositions(int content, int remaining, std::vector<int>& current,
                            const std::vector<double>& pmf,
                            const std::vector<double>& log_fact,
                            std::map<ArrivalOutcome, double>& out) {
  const int m = static_cast<int>(current.size());
  if (content == m - 1) {
    current[static_cast<std::size_t>(content)] = remaining;
    int total = 0;
    for (int a : current) total += a;
    double logp = log_fact[static_cast<std::size_t>(total)];
    double weight = 1.0;
    for (int i = 0; i < m; ++i) {
      const int a = current[static_cast<std::size_t>(i)];
      logp -= log_fact[static_cast<std::size_t>(a)];
      weight *= std::pow(pmf[static_cast<std::size_t>(i)], a);
    }
    out[current] += std::exp(logp) * weight;
    return;
  }
  for (int a = 0; a <= remaining; ++a) {
    current[static_cast<std::size_t>(content)] = a;
    enumerate_compositions(content + 1, remaining - a, current, pmf, log_fact, out);
  }
}

std::size_t compositions_count(int k, int m) {
  // C(k+m-1, m-1), saturating.
  std::size_t result = 1;
  for (int i = 1; i < m; ++i) {
    result = result * static_cast<std::size_t>(k + i) / static_cast<std::size_t>(i);
    if (result > (std::size_t{1} << 62)) return result;
  }
  return result;
}

}  // namespace

ArrivalDistribution per_user_zipf_arrivals(const SystemConfig& config, double alpha,
                                           std::size_t support_cap) {
  config.validate();
  const std::vector<double> pmf = zipf_pmf(config.num_contents, alpha);
  const int users = config.num_users;
  const int m = config.num_contents;

  if (config.uniform()) {
    const std::size_t support = compositions_count(users, m);
    if (support > support_cap) {
      throw CapacityError("per-user arrival support exceeds cap", support, support_cap);
    }
    std::vector<double> log_fact(static_cast<std::size_t>(users) + 1, 0.0);
    for (int i = 2; i <= users; ++i) {
      log_fact[static_cast<std::size_t>(i)] =
          log_fact[static_cast<std::size_t>(i - 1)] + std::log(static_cast<double>(i));
    }
    std::map<ArrivalOutcome, double> out;
    std::vector<int> current(static_cast<std::size_t>(m), 0);
    enumerate_compositions(0, users, current, pmf, log_fact, out);
    return from_map(std::move(out), std::vector<int>(static_cast<std::size_t>(m), users));
  }

  // Nonuniform: enumerate the M^K user-choice tuples and collapse.
  std::size_t support = 1;
  for (int k = 0; k < users; ++k) {
    if (support > support_cap) break;
    support *= static_cast<std::size_t>(m);
  }
  if (support > support_cap) {
    throw CapacityError("per-user arrival support exceeds cap", support, support_cap);
  }
  std::map<ArrivalOutcome, double> out;
  std::vector<int> choice(static_cast<std::size_t>(users), 1);
  while (true) {
    ArrivalOutcome outcome(static_cast<std::size_t>(config.slots()), 0);
    double prob = 1.0;
    for (int k = 1; k <= users; ++k) {
      const int content = choice[static_cast<std::size_t>(k - 1)];
      outcome[static_cast<std::size_t>(config.slot(content, k))] += 1;
      prob *= pmf[static_cast<std::size_t>(content - 1)];
    }
    out[outcome] += prob;
    int pos = users - 1;
    while (pos >= 0 && choice[static_cast<std::size_t>(pos)] == m) {
      choice[static_cast<std::size_t>(pos)] = 1;
      --pos;
    }
    if (pos < 0) break;
    ++choice[static_cast<std::size_t>(pos)];
  }
  return from_map(std::move(out),
                  std::vector<int>(static_cast<std::size_t>(config.slots()), users));
}

ArrivalDistribution independent_product(const std::vector<ScalarDistribution>& per_queue,
                                        std::size_t support_cap) {
  if (per_queue.empty()) throw std::invalid_argument("no per-queue distributions");
  std::size_t support = 1;
  for (const ScalarDistribution& d : per_queue) {
    if (d.empty()) throw std::invalid_argument("empty per-queue distribution");
    double sum = 0.0;
    for (const auto& [value, prob] : d) {
      if (value < 0) throw std::invalid_argument("negative arrival value");
      if (prob <= 0.0 || prob > 1.0) throw std::invalid_argument("probability out of (0,1]");
      sum += prob;
    }
    if (std::abs(sum - 1.0) > kProbTolerance) {
      throw std::invalid_argument("per-queue distribution not normalized");
    }
    if (support > support_cap / d.size() + 1) {
      throw CapacityError("product support exceeds cap", 0, support_cap);
    }
    support *= d.size();
  }
  if (support > support_cap) {
    throw CapacityError("product support exceeds cap", support, support_cap);
  }

  ArrivalDistribution dist;
  dist.max_entries.reserve(per_queue.size());
  for (const ScalarDistribution& d : per_queue) {
    int mx = 0;
    for (const auto& [value, prob] : d) mx = std::max(mx, value);
    dist.max_entries.push_back(mx);
  }
  std::vector<std::size_t> pick(per_queue.size(), 0);
  while (true) {
    ArrivalOutcome outcome(per_queue.size());
    double prob = 1.0;
    for (std::size_t i = 0; i < per_queue.size(); ++i) {
      outcome[i] = per_queue[i][pick[i]].first;
      prob *= per_queue[i][pick[i]].second;
    }
    dist.outcomes.push_back(std::move(outcome));
    dist.probs.push_back(prob);
    std::size_t pos = per_queue.size();
    while (pos-- > 0) {
      if (++pick[pos] < per_queue[pos].size()) break;
      pick[pos] = 0;
      if (pos == 0) {
        dist.validate();
        return dist;
      }
    }
  }
}

ArrivalDistribution marginal_for_content(const ArrivalDistribution& joint,
                                         const SystemConfig& config, int m) {
  joint.validate();
  const int span = config.uniform() ? 1 : config.num_users;
  const std::size_t lo = static_cast<std::size_t>(config.slot(m, 1));
  std::map<ArrivalOutcome, double> out;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    ArrivalOutcome sub(joint.outcomes[i].begin() + static_cast<std::ptrdiff_t>(lo),
                       joint.outcomes[i].begin() + static_cast<std::ptrdiff_t>(lo + span));
    out[sub] += joint.probs[i];
  }
  std::vector<int> maxima;
  if (!joint.max_entries.empty()) {
    maxima.assign(joint.max_entries.begin() + static_cast<std::ptrdiff_t>(lo),
                  joint.max_entries.begin() + static_cast<std::ptrdiff_t>(lo + span));
  }
  return from_map(std::move(out), std::move(maxima));
}

MarkovValidationReport validate_markov_model(const MarkovArrivalModel& model) {
  const std::size_t n = model.states.size();
  if (n == 0) throw std::invalid_argument("markov arrival model has no states");
  if (model.transition.size() != n) {
    throw std::invalid_argument("transition matrix row count mismatch");
  }
  detail::Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (model.transition[i].size() != n) {
      throw std::invalid_argument("transition matrix is not square");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = model.transition[i][j];
      if (p < 0.0 || p > 1.0) throw std::invalid_argument("transition entry out of [0,1]");
      sum += p;
      if (p > 0.0) adj[i].push_back(static_cast<std::uint32_t>(j));
    }
    if (std::abs(sum - 1.0) > kProbTolerance) {
      throw std::invalid_argument("transition row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
    }
  }
  const detail::SccResult scc = detail::strongly_connected_components(adj);
  if (scc.count != 1) {
    throw ErgodicityError("arrival chain is reducible (" + std::to_string(scc.count) +
                          " communicating classes)");
  }
  if (detail::graph_period(adj) != 1) {
    throw ErgodicityError("arrival chain is periodic");
  }

  struct Edge {
    std::uint32_t next;
    double prob;
  };
  std::vector<std::vector<Edge>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (model.transition[i][j] > 0.0) {
        rows[i].push_back({static_cast<std::uint32_t>(j), model.transition[i][j]});
      }
    }
  }
  MarkovValidationReport report;
  report.stationary = detail::solve_stationary(rows, n);
  return report;
}

}  // namespace mcsched
