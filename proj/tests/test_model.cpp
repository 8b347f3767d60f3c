#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcsched/arrivals.hpp"
#include "mcsched/model.hpp"
#include "mcsched/sim.hpp"
#include "mcsched/tables.hpp"
#include "support/instances.hpp"

using namespace mcsched;
using mcsched::testing::nonuniform_config;
using mcsched::testing::uniform_config;

TEST_CASE("mixed-radix state encoding") {
  const SystemConfig config = uniform_config(2, {2, 2}, {}, {1, 1}, {1, 1}, 1, 1);
  CHECK(encode_state({0, 0}, config) == 0);
  CHECK(encode_state({2, 2}, config) == 8);
  CHECK(decode_state(5, config) == QueueState{1, 2});
  CHECK_THROWS_AS(encode_state({3, 0}, config), std::out_of_range);
  CHECK_THROWS_AS(encode_state({0, -1}, config), std::out_of_range);
}

TEST_CASE("encoding is a bijection over the enumerated space") {
  const SystemConfig config = uniform_config(2, {10, 10}, {}, {1, 1}, {1, 1}, 1, 1);
  const std::size_t n = config.state_count(kDefaultMaxStates);
  CHECK(n == 121);
  std::vector<bool> seen(n, false);
  for (int q1 = 0; q1 <= 10; ++q1) {
    for (int q2 = 0; q2 <= 10; ++q2) {
      const StateIndex s = encode_state({q1, q2}, config);
      REQUIRE(s < n);
      CHECK_FALSE(seen[s]);
      seen[s] = true;
      CHECK(decode_state(s, config) == QueueState{q1, q2});
    }
  }
  CHECK(encode_state({3, 1}, config) == 3 * 11 + 1);
}

TEST_CASE("fetch cost") {
  const SystemConfig a = uniform_config(2, {2, 2}, {1}, {3, 3}, {1, 1}, 1, 1);
  CHECK(fetch_cost(1, a) == 0.0);
  CHECK(fetch_cost(2, a) == 3.0);
  const SystemConfig b = uniform_config(2, {2, 2}, {}, {5, 7}, {1, 1}, 1, 1);
  CHECK(fetch_cost(2, b) == 7.0);
  CHECK(fetch_cost(kIdleAction, b) == 0.0);
}

TEST_CASE("nonuniform power cost uses the worst pending requester") {
  const SystemConfig config =
      nonuniform_config(2, 2, {4, 4, 4, 4}, {}, {3, 3}, {2, 4, 2, 4}, 1, 1);
  CHECK(power_cost({1, 3, 0, 0}, 1, config) == 4.0);
  CHECK(power_cost({2, 0, 0, 0}, 1, config) == 2.0);
  CHECK(power_cost({0, 0, 1, 1}, 1, config) == 0.0);  // empty requester set
  CHECK(top_requester({1, 3, 0, 0}, 1, config) == 2);
  CHECK(top_requester({0, 0, 1, 1}, 1, config) == 0);
}

TEST_CASE("per-stage cost") {
  SUBCASE("uniform with uncached content") {
    const SystemConfig config = uniform_config(2, {9, 9}, {1}, {3, 3}, {2, 2}, 1, 1);
    const CostBreakdown g = per_stage_cost({2, 3}, 2, config);
    CHECK(g.delay == 5.0);
    CHECK(g.fetch == 3.0);
    CHECK(g.power == 2.0);
    CHECK(g.total == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("uniform power is paid unconditionally") {
    const SystemConfig config = uniform_config(2, {9, 9}, {1}, {3, 3}, {2, 2}, 1, 1);
    const CostBreakdown g = per_stage_cost({0, 0}, 1, config);
    CHECK(g.total == doctest::Approx(2.0));
  }
  SUBCASE("nonuniform") {
    const SystemConfig config =
        nonuniform_config(2, 2, {4, 4, 4, 4}, {1, 2}, {3, 3}, {2, 4, 2, 4}, 1, 1);
    const CostBreakdown g = per_stage_cost({1, 0, 0, 2}, 2, config);
    CHECK(g.delay == 3.0);
    CHECK(g.power == 4.0);
    CHECK(g.fetch == 0.0);
    CHECK(g.total == doctest::Approx(7.0));
  }
}

TEST_CASE("queue dynamics") {
  const SystemConfig config = uniform_config(2, {10, 10}, {}, {1, 1}, {1, 1}, 1, 1);
  CHECK(queue_step({2, 3}, 1, {1, 0}, config) == QueueState{1, 3});
  CHECK(queue_step({2, 9}, 1, {0, 5}, config) == QueueState{0, 10});

  const SystemConfig non = nonuniform_config(2, 2, {4, 4, 4, 4}, {}, {1, 1},
                                             {1, 1, 1, 1}, 1, 1);
  CHECK(queue_step({1, 1, 0, 2}, 2, {0, 0, 1, 0}, non) == QueueState{1, 1, 1, 0});

  SUBCASE("idle serves nothing") {
    CHECK(queue_step({2, 3}, kIdleAction, {1, 0}, config) == QueueState{3, 3});
  }
}

TEST_CASE("queue_step stays in range for any in-range input") {
  const SystemConfig config = uniform_config(3, {2, 3, 1}, {}, {1, 1, 1}, {1, 1, 1}, 1, 1);
  SplitMix64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    QueueState q(3), a(3);
    for (int i = 0; i < 3; ++i) {
      q[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.next() % static_cast<std::uint64_t>(config.caps[static_cast<std::size_t>(i)] + 1));
      a[static_cast<std::size_t>(i)] = static_cast<int>(rng.next() % 6);
    }
    const Action u = static_cast<Action>(rng.next() % 3 + 1);
    const QueueState next = queue_step(q, u, a, config);
    for (int i = 0; i < 3; ++i) {
      CHECK(next[static_cast<std::size_t>(i)] >= 0);
      CHECK(next[static_cast<std::size_t>(i)] <= config.caps[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("transition expectation") {
  const SystemConfig config = uniform_config(2, {3, 3}, {}, {1, 1}, {1, 1}, 1, 1);
  const std::size_t n = config.state_count(kDefaultMaxStates);

  SUBCASE("deterministic zero arrivals pick out the emptied state") {
    ValueTable values;
    values.v.resize(n);
    for (StateIndex s = 0; s < n; ++s) values.v[s] = static_cast<double>(s) * 1.25;
    const ArrivalDistribution zero = point_mass({0, 0});
    const double e = transition_expectation(values, {2, 3}, 1, zero, config);
    CHECK(e == doctest::Approx(values[encode_state({0, 3}, config)]));
  }

  SUBCASE("expectation of a constant is the constant") {
    ValueTable values;
    values.v.assign(n, 4.5);
    const ArrivalDistribution arrivals = testing::bernoulli_arrivals(2, 0.3);
    CHECK(transition_expectation(values, {1, 2}, 2, arrivals, config) == doctest::Approx(4.5));
  }

  SUBCASE("two-outcome distribution matches the hand-computed sum") {
    ValueTable values;
    values.v.resize(n);
    for (StateIndex s = 0; s < n; ++s) values.v[s] = std::sqrt(static_cast<double>(s) + 1.0);
    ArrivalDistribution dist;
    dist.outcomes = {{1, 0}, {0, 2}};
    dist.probs = {0.25, 0.75};
    dist.max_entries = {1, 2};
    const QueueState q{1, 1};
    const double expected =
        0.25 * values[encode_state(queue_step(q, 2, {1, 0}, config), config)] +
        0.75 * values[encode_state(queue_step(q, 2, {0, 2}, config), config)];
    CHECK(transition_expectation(values, q, 2, dist, config) == doctest::Approx(expected));
  }

  SUBCASE("linear in the value table") {
    ValueTable v1, v2, mix;
    v1.v.resize(n);
    v2.v.resize(n);
    mix.v.resize(n);
    SplitMix64 rng(11);
    for (StateIndex s = 0; s < n; ++s) {
      v1.v[s] = rng.uniform();
      v2.v[s] = rng.uniform();
      mix.v[s] = 2.0 * v1.v[s] - 3.0 * v2.v[s];
    }
    const ArrivalDistribution arrivals = testing::bernoulli_arrivals(2, 0.4);
    for (const QueueState& q : {QueueState{0, 0}, QueueState{1, 3}, QueueState{3, 2}}) {
      for (Action u = 1; u <= 2; ++u) {
        const double lhs = transition_expectation(mix, q, u, arrivals, config);
        const double rhs = 2.0 * transition_expectation(v1, q, u, arrivals, config) -
                           3.0 * transition_expectation(v2, q, u, arrivals, config);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
    }
  }

  SUBCASE("non-normalized distribution is rejected") {
    ValueTable values;
    values.v.assign(n, 0.0);
    ArrivalDistribution bad;
    bad.outcomes = {{0, 0}, {1, 0}};
    bad.probs = {0.5, 0.4};
    CHECK_THROWS_AS(transition_expectation(values, {0, 0}, 1, bad, config),
                    std::invalid_argument);
  }
}

TEST_CASE("nonuniform power is monotone under adding requests at or below the top") {
  const SystemConfig config =
      nonuniform_config(2, 3, {3, 3, 3, 3, 3, 3}, {}, {1, 1}, {1, 2, 5, 1, 2, 5}, 1, 1);
  SplitMix64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    QueueState q(6);
    for (auto& e : q) e = static_cast<int>(rng.next() % 4);
    for (Action u = 1; u <= 2; ++u) {
      const int top = top_requester(q, u, config);
      for (int k = 1; k <= top; ++k) {
        const std::size_t i = static_cast<std::size_t>(config.slot(u, k));
        if (q[i] >= config.caps[i]) continue;
        QueueState up = q;
        up[i] += 1;
        CHECK(power_cost(up, u, config) >= power_cost(q, u, config));
      }
    }
  }
}

TEST_CASE("partial order guard semantics") {
  const SystemConfig config =
      nonuniform_config(2, 2, {4, 4, 4, 4}, {}, {1, 1}, {1, 2, 1, 2}, 1, 1);
  // Adding a request at user 2 when only user 1 is occupied leaves the states
  // incomparable; adding at user 1 keeps them comparable.
  const QueueState base{1, 0, 0, 0};
  CHECK(dominates_partial({2, 0, 0, 0}, base, config));
  CHECK_FALSE(dominates_partial({1, 1, 0, 0}, base, config));
  CHECK(dominates_partial(base, base, config));
  // Extra request on the other content's empty row breaks comparability too.
  CHECK_FALSE(dominates_partial({1, 0, 1, 0}, base, config));
}

TEST_CASE("config validation rejects broken instances") {
  CHECK_THROWS_AS(uniform_config(2, {0, 2}, {}, {1, 1}, {1, 1}, 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(uniform_config(2, {2, 2}, {3}, {1, 1}, {1, 1}, 1, 1),
                  std::invalid_argument);
  // Nonuniform powers must be non-decreasing in the user index.
  CHECK_THROWS_AS(nonuniform_config(1, 2, {2, 2}, {}, {1}, {4, 2}, 1, 1),
                  std::invalid_argument);
}
