#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcsched/approx.hpp"
#include "mcsched/arrivals.hpp"
#include "mcsched/model.hpp"

namespace mcsched {

// Declarative arrival model from the instance file; kept symbolic so sweeps
// over alpha or the user count can rebuild the distribution per grid point.
struct ArrivalSpec {
  enum class Kind { kPerUserZipf, kIndependent, kMarkov };
  Kind kind = Kind::kPerUserZipf;
  double alpha = 0.75;                        // per_user_zipf
  std::vector<ScalarDistribution> per_queue;  // independent
  MarkovArrivalModel markov;                  // markov
};

struct BasePolicySpec {
  bool zipf = true;          // "zipf" keyword: reuse the arrival popularity
  std::vector<double> prob;  // explicit distribution otherwise
};

struct InstanceSpec {
  SystemConfig config;
  ArrivalSpec arrivals;
  BasePolicySpec base;
};

ArrivalDistribution build_arrivals(const InstanceSpec& spec,
                                   std::size_t support_cap = kDefaultSupportCap);
BasePolicy build_base_policy(const InstanceSpec& spec);

// JSON instance files; schema documented in the README.
InstanceSpec parse_instance_text(const std::string& text);
InstanceSpec load_instance(const std::string& path);

}  // namespace mcsched
