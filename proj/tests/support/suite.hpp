#pragma once

// The desk-scale instance suite shared by the acceptance binary. Uniform
// instances span M in {2,3} with caps up to 10; nonuniform instances are
// two-content two-user with caps up to 4. Instances small enough for
// exhaustive policy enumeration (at most 64 states here, and policy spaces
// of at most 3^8 / 2^16 tables) are marked brute_force.

#include <string>
#include <vector>

#include "mcsched/arrivals.hpp"
#include "mcsched/model.hpp"
#include "support/instances.hpp"

namespace mcsched::testing {

struct SuiteInstance {
  std::string name;
  SystemConfig config;
  ArrivalDistribution arrivals;
  double base_alpha = 0.75;  // base policy popularity for the decomposition
  bool brute_force = false;
  // Policy iteration starts from the all-ones policy; on the A22=0 instance
  // that policy freezes the never-arriving queue into one closed class per
  // level, so exact evaluation rejects it and the iteration cannot start.
  bool pia_feasible = true;
};

inline std::vector<SuiteInstance> acceptance_suite() {
  std::vector<SuiteInstance> suite;

  {
    SuiteInstance s;
    s.name = "U1 m2 caps(3,3) cached{1} zipf0.75";
    s.config = uniform_config(2, {3, 3}, {1}, {3, 3}, {2, 2}, 1.0, 1.0, 2);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.75);
    s.brute_force = true;
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "U2 m2 caps(10,10) cached{1} zipf0.75";
    s.config = uniform_config(2, {10, 10}, {1}, {3, 3}, {2, 2}, 1.0, 1.0, 2);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.75);
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "U3 m2 caps(7,8) uncached bernoulli";
    s.config = uniform_config(2, {7, 8}, {}, {5, 7}, {3, 1}, 2.0, 0.5, 2);
    s.arrivals = independent_product({{{0, 0.6}, {1, 0.4}}, {{0, 0.7}, {1, 0.3}}});
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "U4 m3 caps(1,1,1) cached{1,2} zipf0.75";
    s.config = uniform_config(3, {1, 1, 1}, {1, 2}, {3, 3, 3}, {2, 2, 2}, 1.0, 1.0, 2);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.75);
    s.brute_force = true;
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "U5 m3 caps(4,4,4) cached{1,2} zipf0.75";
    s.config = uniform_config(3, {4, 4, 4}, {1, 2}, {3, 3, 3}, {2, 2, 2}, 1.0, 1.0, 2);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.75);
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "U6 m3 caps(5,5,5) cached{2} bernoulli";
    s.config = uniform_config(3, {5, 5, 5}, {2}, {2, 3, 4}, {1, 2, 3}, 2.0, 3.0, 2);
    s.arrivals = independent_product(
        {{{0, 0.5}, {1, 0.5}}, {{0, 0.7}, {1, 0.3}}, {{0, 0.8}, {1, 0.2}}});
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "U7 m2 caps(2,2) symmetric all-cached";
    s.config = uniform_config(2, {2, 2}, {1, 2}, {3, 3}, {2, 2}, 1.0, 1.0, 2);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.0);
    s.base_alpha = 0.0;
    s.brute_force = true;
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "N1 m2k2 caps1 cached{1} zipf0.75";
    s.config = nonuniform_config(2, 2, {1, 1, 1, 1}, {1}, {3, 3}, {2, 4, 2, 4}, 1.0, 1.0);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.75);
    s.brute_force = true;
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "N2 m2k2 caps2 cached{1} zipf0.75";
    s.config = nonuniform_config(2, 2, {2, 2, 2, 2}, {1}, {3, 3}, {2, 4, 2, 4}, 1.0, 1.0);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.75);
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "N3 m2k2 caps4 uncached zipf0.9";
    s.config = nonuniform_config(2, 2, {4, 4, 4, 4}, {}, {3, 5}, {1, 3, 2, 6}, 1.0, 2.0);
    s.arrivals = per_user_zipf_arrivals(s.config, 0.9);
    s.base_alpha = 0.9;
    suite.push_back(std::move(s));
  }
  {
    SuiteInstance s;
    s.name = "N4 m2k2 A22=0 (one pair never arrives)";
    s.config = nonuniform_config(2, 2, {2, 2, 3, 3}, {2}, {3, 3}, {2, 4, 2, 4}, 1.0, 1.0);
    s.arrivals = independent_product({{{0, 0.5}, {1, 0.5}},
                                      {{0, 0.7}, {1, 0.3}},
                                      {{0, 0.6}, {1, 0.4}},
                                      {{0, 1.0}}});
    s.pia_feasible = false;
    suite.push_back(std::move(s));
  }
  return suite;
}

}  // namespace mcsched::testing
