#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mcsched/approx.hpp"
#include "mcsched/errors.hpp"
#include "mcsched/mdp.hpp"
#include "mcsched/policies.hpp"
#include "mcsched/sim.hpp"
#include "mcsched/solvers.hpp"
#include "support/instances.hpp"

using namespace mcsched;
using mcsched::testing::nonuniform_config;
using mcsched::testing::uniform_config;

namespace {

// Residual of the per-content fixed point at every per-content state.
double per_content_residual(const BasePolicy& base, int m, const SystemConfig& config,
                            const ArrivalDistribution& arrivals,
                            const PerContentValue& solved) {
  const ArrivalDistribution marginal = marginal_for_content(arrivals, config, m);
  const int span = config.uniform() ? 1 : config.num_users;
  std::vector<int> caps;
  for (int k = 1; k <= span; ++k) {
    caps.push_back(config.caps[static_cast<std::size_t>(config.slot(m, k))]);
  }
  std::size_t count = 1;
  for (int cap : caps) count *= static_cast<std::size_t>(cap) + 1;

  auto encode = [&](const std::vector<int>& q) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      index = index * (static_cast<std::size_t>(caps[i]) + 1) + static_cast<std::size_t>(q[i]);
    }
    return index;
  };

  double worst = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<int> q(caps.size());
    std::size_t rest = s;
    for (std::size_t i = caps.size(); i-- > 0;) {
      q[i] = static_cast<int>(rest % (static_cast<std::size_t>(caps[i]) + 1));
      rest /= static_cast<std::size_t>(caps[i]) + 1;
    }
    double rhs = 0.0;
    for (Action u = 1; u <= config.num_contents; ++u) {
      const double pu = base.prob[static_cast<std::size_t>(u - 1)];
      if (pu == 0.0) continue;
      double queued = 0.0;
      for (int e : q) queued += e;
      double g = queued + config.weight_fetch * fetch_cost(u, config);
      if (u == m) {
        if (config.uniform()) {
          g += config.weight_power * config.power_of(m);
        } else {
          for (int k = span; k >= 1; --k) {
            if (q[static_cast<std::size_t>(k - 1)] > 0) {
              g += config.weight_power * config.power_of(m, k);
              break;
            }
          }
        }
      }
      double ev = 0.0;
      for (std::size_t i = 0; i < marginal.size(); ++i) {
        std::vector<int> next(q.size());
        for (std::size_t j = 0; j < q.size(); ++j) {
          next[j] = std::min((u == m ? 0 : q[j]) + marginal.outcomes[i][j], caps[j]);
        }
        ev += marginal.probs[i] * solved.value[encode(next)];
      }
      rhs += pu * (g + ev);
    }
    worst = std::max(worst, std::abs(solved.theta + solved.value[s] - rhs));
  }
  return worst;
}

}  // namespace

TEST_CASE("per-content solve") {
  SUBCASE("base policy pinned on m with zero arrivals") {
    const SystemConfig config = uniform_config(2, {3, 3}, {2}, {5, 4}, {2, 3}, 1.0, 1.0);
    const ArrivalDistribution zero = point_mass({0, 0});
    BasePolicy base;
    base.prob = {1.0, 0.0};
    const PerContentValue pc = per_content_solve(base, 1, config, zero);
    // Queue 1 absorbs at 0 and every slot pays w_f f(1) + w_p p(1) = 5 + 2.
    CHECK(pc.theta == doctest::Approx(7.0).epsilon(1e-10));
  }

  SUBCASE("single content: decomposition collapses to full policy evaluation") {
    const auto inst = mcsched::testing::single_content_instance();
    BasePolicy base;
    base.prob = {1.0};
    const PerContentValue pc = per_content_solve(base, 1, inst.config, inst.arrivals);
    const PolicyTable only(inst.config.state_count(kDefaultMaxStates), 1);
    const auto [theta, values] = policy_evaluate(only, inst.config, inst.arrivals);
    CHECK(pc.theta == doctest::Approx(theta).epsilon(1e-10));
  }

  SUBCASE("fixed-point residual is tiny at every per-content state") {
    const SystemConfig config = uniform_config(2, {4, 4}, {1}, {3, 3}, {2, 2}, 1.0, 1.0);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
    const BasePolicy base = zipf_base_policy(config, 0.75);
    for (int m = 1; m <= 2; ++m) {
      const PerContentValue pc = per_content_solve(base, m, config, arrivals);
      CHECK(per_content_residual(base, m, config, arrivals, pc) < 1e-9);
    }
  }

  SUBCASE("per-content chain that is not unichain is rejected") {
    // Base policy never serves content 2 and content 2 never sees arrivals,
    // so every queue level of content 2 is its own closed class.
    const SystemConfig config = uniform_config(2, {3, 3}, {1, 2}, {1, 1}, {2, 2}, 1.0, 1.0);
    const ArrivalDistribution arrivals =
        independent_product({{{0, 0.5}, {1, 0.5}}, {{0, 1.0}}});
    BasePolicy base;
    base.prob = {1.0, 0.0};
    CHECK_THROWS_AS(per_content_solve(base, 2, config, arrivals), UnichainViolationError);
  }
}

TEST_CASE("joint evaluation of the base policy matches the decomposition bookkeeping") {
  // Summing the per-content fixed points double-counts the state-independent
  // fetch term, once per content; the joint average cost differs from the sum
  // of per-content averages by exactly (M-1) * w_f * E[f(u)].
  const SystemConfig config = uniform_config(3, {3, 3, 3}, {1}, {3, 4, 5}, {2, 2, 2},
                                             2.0, 1.0, 2);
  const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
  const BasePolicy base = zipf_base_policy(config, 0.75);
  const Decomposition decomp = decompose(base, config, arrivals);

  const CompiledMdp mdp = CompiledMdp::joint(config, arrivals);
  const auto [theta_joint, values] = evaluate_randomized(mdp, base.prob, 0);
  double mean_fetch = 0.0;
  for (Action u = 1; u <= 3; ++u) {
    mean_fetch += base.prob[static_cast<std::size_t>(u - 1)] * fetch_cost(u, config);
  }
  const double expected = decomp.theta_sum() - 2.0 * config.weight_fetch * mean_fetch;
  CHECK(theta_joint == doctest::Approx(expected).epsilon(1e-10));
  CHECK(exact_average_cost_randomized(base, config, arrivals).total ==
        doctest::Approx(theta_joint).epsilon(1e-9));
}

TEST_CASE("summed per-content values satisfy the joint fixed point") {
  SUBCASE("uniform") {
    const SystemConfig config = uniform_config(2, {4, 4}, {1}, {3, 3}, {2, 2}, 1.0, 1.0);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
    const BasePolicy base = zipf_base_policy(config, 0.75);
    const Decomposition decomp = decompose(base, config, arrivals);
    CHECK(decomposition_residual(decomp, base, config, arrivals) < 1e-8);
  }
  SUBCASE("nonuniform with cross-content arrival correlation") {
    const SystemConfig config =
        nonuniform_config(2, 2, {2, 2, 2, 2}, {1}, {3, 3}, {2, 4, 2, 4}, 1.0, 1.0);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
    const BasePolicy base = zipf_base_policy(config, 0.75);
    const Decomposition decomp = decompose(base, config, arrivals);
    CHECK(decomposition_residual(decomp, base, config, arrivals) < 1e-8);
  }
}

TEST_CASE("ssa policy") {
  SUBCASE("single content always schedules it") {
    const auto inst = mcsched::testing::single_content_instance();
    BasePolicy base;
    base.prob = {1.0};
    const PolicyTable policy = ssa(inst.config, inst.arrivals, base);
    for (Action a : policy) CHECK(a == 1);
  }

  SUBCASE("symmetric instance gives mirror-image switch regions") {
    const SystemConfig config = uniform_config(2, {4, 4}, {}, {3, 3}, {2, 2}, 1.0, 1.0);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.0);
    BasePolicy base;
    base.prob = {0.5, 0.5};
    const PolicyTable policy = ssa(config, arrivals, base);
    CHECK(verify_switch_structure(policy, config).empty());
    // Swapping the contents reflects the policy; exact diagonal ties resolve
    // to the lower index.
    for (int a = 0; a <= 4; ++a) {
      for (int b = 0; b <= 4; ++b) {
        const Action u = policy[encode_state({a, b}, config)];
        const Action v = policy[encode_state({b, a}, config)];
        if (a == b) {
          CHECK(u == 1);
        } else {
          CHECK(u + v == 3);
        }
      }
    }
  }

  SUBCASE("strictly improves on the base policy") {
    const SystemConfig config = uniform_config(3, {3, 3, 3}, {1}, {3, 3, 3}, {2, 2, 2},
                                               1.0, 1.0, 2);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
    const BasePolicy base = zipf_base_policy(config, 0.75);
    const PolicyTable policy = ssa(config, arrivals, base);
    const auto [theta_ssa, values] = policy_evaluate(policy, config, arrivals);
    const CostBreakdown base_cost = exact_average_cost_randomized(base, config, arrivals);
    CHECK(theta_ssa < base_cost.total - 1e-6);
  }

  SUBCASE("structured sweep skips work and matches the direct argmin") {
    const SystemConfig config = uniform_config(2, {6, 6}, {1}, {3, 3}, {2, 2}, 1.0, 1.0);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
    const BasePolicy base = zipf_base_policy(config, 0.75);
    const SsaReport report = ssa_report(config, arrivals, base);
    CHECK(report.minimizations_skipped > 0);
    CHECK(report.minimizations_performed + report.minimizations_skipped ==
          config.state_count(kDefaultMaxStates));
    for (StateIndex s = 0; s < report.policy.size(); ++s) {
      CHECK(report.policy[s] ==
            ssa_action(report.decomposition, config, decode_state(s, config)));
    }
  }
}

TEST_CASE("ssa structure holds in both cases") {
  SUBCASE("uniform") {
    const SystemConfig config = uniform_config(3, {3, 3, 3}, {1, 2}, {3, 3, 3},
                                               {1, 2, 3}, 1.0, 2.0, 2);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
    const PolicyTable policy = ssa(config, arrivals, zipf_base_policy(config, 0.75));
    CHECK(verify_switch_structure(policy, config).empty());
  }
  SUBCASE("nonuniform") {
    const SystemConfig config =
        nonuniform_config(2, 2, {3, 3, 3, 3}, {1}, {3, 3}, {2, 4, 2, 4}, 1.0, 1.0);
    const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
    const PolicyTable policy = ssa(config, arrivals, zipf_base_policy(config, 0.75));
    CHECK(verify_partial_switch_structure(policy, config).empty());
  }
}

TEST_CASE("approximate state-action cost satisfies the difference inequality") {
  const SystemConfig config = uniform_config(2, {4, 4}, {1}, {3, 3}, {2, 2}, 1.0, 1.0);
  const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
  const Decomposition decomp = decompose(zipf_base_policy(config, 0.75), config, arrivals);
  CHECK(j_hat_difference_violations(decomp, config) == 0);
}

TEST_CASE("myopic policy") {
  SUBCASE("uniform") {
    const SystemConfig config = uniform_config(2, {9, 9}, {1}, {3, 3}, {2, 2}, 1.0, 1.0);
    // C(Q,1) = 2 - 4 = -2, C(Q,2) = 3 + 2 - 1 = 4.
    CHECK(myopic_action(config, {4, 1}) == 1);
  }
  SUBCASE("all-zero state falls to the tie-break") {
    const SystemConfig config = uniform_config(3, {3, 3, 3}, {1, 2, 3}, {1, 1, 1},
                                               {2, 2, 2}, 1.0, 1.0);
    CHECK(myopic_action(config, {0, 0, 0}) == 1);
  }
  SUBCASE("nonuniform favors the content with queued demand") {
    const SystemConfig config =
        nonuniform_config(2, 2, {4, 4, 4, 4}, {1, 2}, {3, 3}, {2, 4, 2, 4}, 1.0, 1.0);
    // Q = ((1,0),(3,1)): C(Q,1) = p(1,1) - 1 = 1, C(Q,2) = p(2,2) - 4 = 0.
    CHECK(myopic_action(config, {1, 0, 3, 1}) == 2);
    const PolicyTable table = myopic_policy(config);
    CHECK(table[encode_state({1, 0, 3, 1}, config)] == 2);
  }
}

TEST_CASE("transition distinctness reporting") {
  const SystemConfig config = uniform_config(2, {2, 2}, {1, 2}, {1, 1}, {2, 2}, 1.0, 1.0);
  const ArrivalDistribution arrivals = per_user_zipf_arrivals(config, 0.75);
  const auto violations = transition_distinctness_violations(config, arrivals);
  // Serving either content at the all-zero state induces the same row, so the
  // zero state is always flagged.
  CHECK(std::find(violations.begin(), violations.end(),
                  encode_state({0, 0}, config)) != violations.end());
  // A state with both queues pending distinguishes the actions.
  CHECK(std::find(violations.begin(), violations.end(),
                  encode_state({1, 1}, config)) == violations.end());
}

TEST_CASE("base policy validation") {
  const SystemConfig config = uniform_config(2, {2, 2}, {}, {1, 1}, {1, 1}, 1.0, 1.0);
  BasePolicy bad;
  bad.prob = {0.6, 0.6};
  CHECK_THROWS_AS(bad.validate(config), std::invalid_argument);
  bad.prob = {0.5};
  CHECK_THROWS_AS(bad.validate(config), std::invalid_argument);
  const BasePolicy good = zipf_base_policy(config, 0.75);
  CHECK_NOTHROW(good.validate(config));
}
