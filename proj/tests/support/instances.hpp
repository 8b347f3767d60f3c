#pragma once

// Instance builders shared between the unit suites and the acceptance suite.

#include <vector>

#include "mcsched/arrivals.hpp"
#include "mcsched/model.hpp"

namespace mcsched::testing {

inline SystemConfig uniform_config(int num_contents, std::vector<int> caps,
                                   std::vector<int> cached, std::vector<double> fetch,
                                   std::vector<double> power, double weight_fetch,
                                   double weight_power, int num_users = 2) {
  SystemConfig config;
  config.case_kind = CaseKind::kUniform;
  config.num_contents = num_contents;
  config.num_users = num_users;
  config.caps = std::move(caps);
  config.cached = std::move(cached);
  config.fetch_base = std::move(fetch);
  config.power = std::move(power);
  config.weight_fetch = weight_fetch;
  config.weight_power = weight_power;
  config.validate();
  return config;
}

inline SystemConfig nonuniform_config(int num_contents, int num_users, std::vector<int> caps,
                                      std::vector<int> cached, std::vector<double> fetch,
                                      std::vector<double> power, double weight_fetch,
                                      double weight_power) {
  SystemConfig config;
  config.case_kind = CaseKind::kNonuniform;
  config.num_contents = num_contents;
  config.num_users = num_users;
  config.caps = std::move(caps);
  config.cached = std::move(cached);
  config.fetch_base = std::move(fetch);
  config.power = std::move(power);
  config.weight_fetch = weight_fetch;
  config.weight_power = weight_power;
  config.validate();
  return config;
}

// Single content, cached, p=2, w_f=w_p=1, N=5, arrivals Bernoulli(1/2).
// The only policy serves every slot, so the queue is 0 or 1 with equal
// probability and theta = 0.5 + 2 = 2.5 exactly.
struct SingleContentInstance {
  SystemConfig config;
  ArrivalDistribution arrivals;
};

inline SingleContentInstance single_content_instance() {
  SingleContentInstance inst;
  inst.config = uniform_config(1, {5}, {1}, {3.0}, {2.0}, 1.0, 1.0, 1);
  inst.arrivals = independent_product({{{0, 0.5}, {1, 0.5}}});
  return inst;
}

// Bernoulli(p) product arrivals for a uniform instance with M contents.
inline ArrivalDistribution bernoulli_arrivals(int slots, double p) {
  std::vector<ScalarDistribution> per_queue(static_cast<std::size_t>(slots),
                                            ScalarDistribution{{0, 1.0 - p}, {1, p}});
  return independent_product(per_queue);
}

}  // namespace mcsched::testing
