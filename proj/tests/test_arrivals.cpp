#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "mcsched/arrivals.hpp"
#include "mcsched/errors.hpp"
#include "support/instances.hpp"

using namespace mcsched;
using mcsched::testing::nonuniform_config;
using mcsched::testing::uniform_config;

namespace {

double total_probability(const ArrivalDistribution& dist) {
  double sum = 0.0;
  for (double p : dist.probs) sum += p;
  return sum;
}

double probability_of(const ArrivalDistribution& dist, const ArrivalOutcome& outcome) {
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.outcomes[i] == outcome) return dist.probs[i];
  }
  return 0.0;
}

}  // namespace

TEST_CASE("zipf pmf") {
  CHECK(zipf_pmf(2, 0.0) == std::vector<double>{0.5, 0.5});
  const std::vector<double> p = zipf_pmf(2, 1.0);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0));

  const std::vector<double> q = zipf_pmf(3, 0.75);
  CHECK(q[0] + q[1] + q[2] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(q[0] >= q[1]);
  CHECK(q[1] >= q[2]);
}

TEST_CASE("per-user arrivals, uniform aggregate is multinomial") {
  const SystemConfig config = uniform_config(2, {5, 5}, {}, {1, 1}, {1, 1}, 1, 1, 2);
  const ArrivalDistribution dist = per_user_zipf_arrivals(config, 0.0);
  CHECK(dist.size() == 3);
  CHECK(probability_of(dist, {2, 0}) == doctest::Approx(0.25));
  CHECK(probability_of(dist, {1, 1}) == doctest::Approx(0.5));
  CHECK(probability_of(dist, {0, 2}) == doctest::Approx(0.25));
}

TEST_CASE("per-user arrivals, single user") {
  const SystemConfig config = uniform_config(3, {5, 5, 5}, {}, {1, 1, 1}, {1, 1, 1}, 1, 1, 1);
  const ArrivalDistribution dist = per_user_zipf_arrivals(config, 0.75);
  const std::vector<double> pmf = zipf_pmf(3, 0.75);
  CHECK(dist.size() == 3);
  CHECK(probability_of(dist, {1, 0, 0}) == doctest::Approx(pmf[0]));
  CHECK(probability_of(dist, {0, 1, 0}) == doctest::Approx(pmf[1]));
  CHECK(probability_of(dist, {0, 0, 1}) == doctest::Approx(pmf[2]));
}

TEST_CASE("per-user arrivals match brute-force enumeration of user choices") {
  const int users = 3;
  const SystemConfig config = uniform_config(2, {9, 9}, {}, {1, 1}, {1, 1}, 1, 1, users);
  const double alpha = 1.0;  // P = (2/3, 1/3)
  const ArrivalDistribution dist = per_user_zipf_arrivals(config, alpha);
  const std::vector<double> pmf = zipf_pmf(2, alpha);

  // Enumerate the 2^3 user-choice tuples directly.
  std::map<ArrivalOutcome, double> oracle;
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      for (int c2 = 0; c2 < 2; ++c2) {
        ArrivalOutcome agg{0, 0};
        double prob = 1.0;
        for (int choice : {c0, c1, c2}) {
          agg[static_cast<std::size_t>(choice)] += 1;
          prob *= pmf[static_cast<std::size_t>(choice)];
        }
        oracle[agg] += prob;
      }
    }
  }
  CHECK(dist.size() == oracle.size());
  for (const auto& [outcome, prob] : oracle) {
    CHECK(probability_of(dist, outcome) == doctest::Approx(prob).epsilon(1e-12));
  }
}

TEST_CASE("per-user arrivals, nonuniform matrices keep one request per user") {
  const SystemConfig config =
      nonuniform_config(2, 2, {3, 3, 3, 3}, {}, {1, 1}, {1, 2, 1, 2}, 1, 1);
  const ArrivalDistribution dist = per_user_zipf_arrivals(config, 0.75);
  CHECK(dist.size() == 4);  // M^K collapsed (all tuples distinct)
  CHECK(total_probability(dist) == doctest::Approx(1.0).epsilon(1e-12));
  for (const ArrivalOutcome& a : dist.outcomes) {
    // Each user contributes exactly one request: column sums are 1.
    CHECK(a[0] + a[2] == 1);  // user 1 over both contents
    CHECK(a[1] + a[3] == 1);  // user 2
  }
}

TEST_CASE("expected total arrivals per slot equals the user count") {
  for (int users : {1, 2, 4}) {
    const SystemConfig config =
        uniform_config(3, {9, 9, 9}, {}, {1, 1, 1}, {1, 1, 1}, 1, 1, users);
    const ArrivalDistribution dist = per_user_zipf_arrivals(config, 0.75);
    double expected_total = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      int total = 0;
      for (int a : dist.outcomes[i]) total += a;
      expected_total += dist.probs[i] * total;
    }
    CHECK(expected_total == doctest::Approx(static_cast<double>(users)).epsilon(1e-12));
  }
}

TEST_CASE("collapsing preserves expectations of test functions") {
  // Compare E[f(A_1, A_2)] between the collapsed aggregate and raw user-choice
  // enumeration for K=4 users.
  const int users = 4;
  const SystemConfig config = uniform_config(2, {9, 9}, {}, {1, 1}, {1, 1}, 1, 1, users);
  const double alpha = 0.75;
  const ArrivalDistribution dist = per_user_zipf_arrivals(config, alpha);
  const std::vector<double> pmf = zipf_pmf(2, alpha);

  auto f = [](int a1, int a2) { return a1 * a1 + 3.0 * a2; };
  double collapsed = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    collapsed += dist.probs[i] * f(dist.outcomes[i][0], dist.outcomes[i][1]);
  }
  double raw = 0.0;
  for (int mask = 0; mask < (1 << users); ++mask) {
    int a1 = 0;
    double prob = 1.0;
    for (int u = 0; u < users; ++u) {
      const bool first = (mask >> u) & 1;
      a1 += first ? 1 : 0;
      prob *= first ? pmf[0] : pmf[1];
    }
    raw += prob * f(a1, users - a1);
  }
  CHECK(collapsed == doctest::Approx(raw).epsilon(1e-12));
}

TEST_CASE("independent product") {
  SUBCASE("two bernoulli queues") {
    const ArrivalDistribution dist = testing::bernoulli_arrivals(2, 0.5);
    CHECK(dist.size() == 4);
    for (double p : dist.probs) CHECK(p == doctest::Approx(0.25));
  }
  SUBCASE("deterministic times bernoulli") {
    const ArrivalDistribution dist =
        independent_product({{{2, 1.0}}, {{0, 0.25}, {1, 0.75}}});
    CHECK(dist.size() == 2);
    CHECK(probability_of(dist, {2, 0}) == doctest::Approx(0.25));
    CHECK(probability_of(dist, {2, 1}) == doctest::Approx(0.75));
  }
  SUBCASE("three three-point distributions") {
    const ScalarDistribution d{{0, 0.2}, {1, 0.5}, {3, 0.3}};
    const ArrivalDistribution dist = independent_product({d, d, d});
    CHECK(dist.size() == 27);
    CHECK(total_probability(dist) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("support cap") {
    const ScalarDistribution d{{0, 0.5}, {1, 0.5}};
    CHECK_THROWS_AS(independent_product({d, d, d, d}, 15), CapacityError);
  }
  SUBCASE("per-user support cap names the required limit") {
    const SystemConfig config =
        uniform_config(4, {9, 9, 9, 9}, {}, {1, 1, 1, 1}, {1, 1, 1, 1}, 1, 1, 8);
    try {
      per_user_zipf_arrivals(config, 0.75, 100);
      FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
      CHECK(e.required() == 165);  // compositions of 8 requests into 4 contents
      CHECK(e.limit() == 100);
    }
  }
}

TEST_CASE("marginalization keeps the per-content law exact") {
  const SystemConfig config =
      nonuniform_config(2, 2, {3, 3, 3, 3}, {}, {1, 1}, {1, 2, 1, 2}, 1, 1);
  const ArrivalDistribution joint = per_user_zipf_arrivals(config, 1.0);
  const ArrivalDistribution marginal = marginal_for_content(joint, config, 2);
  CHECK(total_probability(marginal) == doctest::Approx(1.0).epsilon(1e-12));
  // P[user k requests content 2] = 1/3 under alpha=1, independently.
  CHECK(probability_of(marginal, {1, 1}) == doctest::Approx(1.0 / 9.0));
  CHECK(probability_of(marginal, {1, 0}) == doctest::Approx(2.0 / 9.0));
  CHECK(probability_of(marginal, {0, 0}) == doctest::Approx(4.0 / 9.0));
}

TEST_CASE("markov arrival model validation") {
  SUBCASE("one-state chain") {
    MarkovArrivalModel model;
    model.states = {{1, 0}};
    model.transition = {{1.0}};
    const MarkovValidationReport report = validate_markov_model(model);
    REQUIRE(report.stationary.size() == 1);
    CHECK(report.stationary[0] == doctest::Approx(1.0));
  }
  SUBCASE("two-state symmetric chain") {
    MarkovArrivalModel model;
    model.states = {{1, 0}, {0, 1}};
    model.transition = {{0.5, 0.5}, {0.5, 0.5}};
    const MarkovValidationReport report = validate_markov_model(model);
    CHECK(report.stationary[0] == doctest::Approx(0.5));
    CHECK(report.stationary[1] == doctest::Approx(0.5));
  }
  SUBCASE("three-state chain matches the power-iteration oracle") {
    MarkovArrivalModel model;
    model.states = {{0, 0}, {1, 0}, {0, 2}};
    model.transition = {{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}, {0.25, 0.25, 0.5}};
    const MarkovValidationReport report = validate_markov_model(model);

    std::vector<double> pi{1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (int iter = 0; iter < 20000; ++iter) {
      std::vector<double> next(3, 0.0);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          next[static_cast<std::size_t>(j)] +=
              pi[static_cast<std::size_t>(i)] * model.transition[static_cast<std::size_t>(i)]
                                                                [static_cast<std::size_t>(j)];
        }
      }
      pi = next;
    }
    for (int i = 0; i < 3; ++i) {
      CHECK(report.stationary[static_cast<std::size_t>(i)] ==
            doctest::Approx(pi[static_cast<std::size_t>(i)]).epsilon(1e-10));
    }
  }
  SUBCASE("reducible chain is rejected") {
    MarkovArrivalModel model;
    model.states = {{0}, {1}};
    model.transition = {{1.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(validate_markov_model(model), ErgodicityError);
  }
  SUBCASE("periodic chain is rejected") {
    MarkovArrivalModel model;
    model.states = {{0}, {1}};
    model.transition = {{0.0, 1.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(validate_markov_model(model), ErgodicityError);
  }
  SUBCASE("non-stochastic row is rejected") {
    MarkovArrivalModel model;
    model.states = {{0}, {1}};
    model.transition = {{0.7, 0.2}, {0.5, 0.5}};
    CHECK_THROWS_AS(validate_markov_model(model), std::invalid_argument);
  }
}
