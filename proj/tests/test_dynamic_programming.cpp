#include <gtest/gtest.h>

#include <cmath>

#include "pabc/dynamic_programming.hpp"
#include "pabc/instances.hpp"
#include "pabc/oracles.hpp"
#include "pabc/rng.hpp"
#include "test_helpers.hpp"

using namespace pabc;

TEST(OptimalQ, ZeroRewardMdpIsZero) {
    auto m = random_mdp(3, test::small_options());
    for (auto& layer : m.rewards)
        for (auto& x : layer)
            for (auto& r : x) r = 0.0;
    EXPECT_DOUBLE_EQ(optimal_q(m).max_abs(), 0.0);
    EXPECT_DOUBLE_EQ(policy_value(m, Policy::uniform(m.shape())), 0.0);
}

TEST(OptimalQ, OneStepThreeActions) {
    const auto inst = build_table1_example();
    const Table q = optimal_q(inst.mdp);
    EXPECT_DOUBLE_EQ(q(0, 0, 0), 0.8);
    EXPECT_DOUBLE_EQ(q(0, 0, 1), 0.6);
    EXPECT_DOUBLE_EQ(q(0, 0, 2), 0.3);
    EXPECT_EQ(greedy_policy(q).action(0, 0), 0u);
}

TEST(OptimalQ, Counterexample) {
    const auto inst = build_counterexample();
    const Table q = optimal_q(inst.mdp);
    const auto [h, x0] = *inst.mdp.find_state("x0");
    const auto l1 = *inst.mdp.find_action(h, x0, "L1");
    const auto r1 = *inst.mdp.find_action(h, x0, "R1");
    EXPECT_DOUBLE_EQ(q(0, x0, l1), 1.0);
    EXPECT_DOUBLE_EQ(q(0, x0, r1), 0.0);
    EXPECT_DOUBLE_EQ(oracle::brute_force_optimal(inst.mdp).value, 1.0);
}

TEST(Greedy, TieRules) {
    const Shape shape{{3}};
    const Table c(shape, TableRole::value, 0.5);
    EXPECT_EQ(greedy_policy(c).action(0, 0), 0u);
    GreedyRule last{TieRule::last_index, 1e-9, {}};
    EXPECT_EQ(greedy_policy(c, last).action(0, 0), 2u);
    GreedyRule pick{TieRule::explicit_choice, 1e-9, {{{0, 0}, 1}}};
    EXPECT_EQ(greedy_policy(c, pick).action(0, 0), 1u);

    Table d = c;
    d(0, 0, 2) = 0.9;
    EXPECT_EQ(greedy_policy(d, pick).action(0, 0), 2u);
}

TEST(Greedy, CounterexampleAdversarialChoice) {
    const auto inst = build_counterexample();
    const auto x0 = inst.mdp.find_state("x0")->second;
    const auto r1 = *inst.mdp.find_action(0, x0, "R1");
    EXPECT_EQ(greedy_policy(inst.F[1], inst.greedy).action(0, x0), r1);
    EXPECT_NE(greedy_policy(inst.F[1]).action(0, x0), r1);
}

TEST(PolicyValue, Counterexample) {
    const auto inst = build_counterexample();
    const Policy star = greedy_policy(inst.F[0]);
    const Policy bad = greedy_policy(inst.F[1], inst.greedy);
    EXPECT_DOUBLE_EQ(policy_value(inst.mdp, star), 1.0);
    EXPECT_DOUBLE_EQ(policy_value(inst.mdp, bad), 0.0);
    EXPECT_DOUBLE_EQ(policy_disagreement(inst.mdp, bad, star), 1.0);
    EXPECT_DOUBLE_EQ(policy_disagreement(inst.mdp, star, star), 0.0);
}

TEST(Occupancy, PointMassAndUniform) {
    const auto inst = build_table1_example();
    const Table d = occupancy(inst.mdp, greedy_policy(optimal_q(inst.mdp)));
    EXPECT_DOUBLE_EQ(d(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(d(0, 0, 1), 0.0);
    EXPECT_DOUBLE_EQ(d(0, 0, 2), 0.0);

    LayeredMdp two;
    two.horizon = 1;
    two.layers = {{"x"}, {"end"}};
    two.actions = {{{"a", "b"}}};
    two.transitions = {{{{1.0}, {1.0}}}};
    two.rewards = {{{0.0, 1.0}}};
    const Table u = occupancy(two, Policy::uniform(two.shape()));
    EXPECT_DOUBLE_EQ(u(0, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(u(0, 0, 1), 0.5);
}

TEST(Occupancy, MatchesMonteCarloFrequencies) {
    RandomOptions o = test::small_options();
    o.min_horizon = o.max_horizon = 3;
    const LayeredMdp m = random_mdp(11, o);
    const Policy pi = Policy::uniform(m.shape());
    const Table d = occupancy(m, pi);

    const std::size_t rollouts = 100000;
    Table counts(m.shape(), TableRole::value);
    Rng rng(99);
    for (std::size_t i = 0; i < rollouts; ++i) {
        std::size_t x = m.initial_state;
        for (std::size_t h = 0; h < m.horizon; ++h) {
            const std::size_t a = rng.categorical(pi.probs(h, x));
            counts(h, x, a) += 1.0;
            x = rng.categorical(m.next_state_probs(h, x, a));
        }
    }
    for (std::size_t h = 0; h < m.horizon; ++h)
        for (std::size_t x = 0; x < m.num_states(h); ++x)
            for (std::size_t a = 0; a < m.num_actions(h, x); ++a) {
                const double p = d(h, x, a);
                const double se = std::sqrt(p * (1 - p) / rollouts);
                EXPECT_NEAR(counts(h, x, a) / rollouts, p, 3 * se + 1e-12) << h << ' ' << x << ' ' << a;
            }
}

TEST(Gap, OneStepValues) {
    const auto inst = build_table1_example();
    EXPECT_NEAR(gap_of_function(inst.F[0]), 0.2, 1e-12);
    EXPECT_NEAR(gap_of_function(inst.F[1]), 0.1, 1e-12);
    const std::vector<Table> only_q{inst.F[0]};
    EXPECT_NEAR(gap_of_class(only_q), 0.2, 1e-12);
    EXPECT_NEAR(gap_of_class(inst.F.tables()), 0.1, 1e-12);
    const std::vector<Table> with_constant{inst.F[0], Table(inst.mdp.shape(), TableRole::value, 0.3)};
    EXPECT_DOUBLE_EQ(gap_of_class(with_constant), 0.0);
}

TEST(Gap, CounterexampleTieAndSingleActionStates) {
    const auto inst = build_counterexample();
    EXPECT_DOUBLE_EQ(gap_of_function(inst.F[1]), 0.0);
    EXPECT_DOUBLE_EQ(gap_of_function(inst.F[0]), 1.0);
    EXPECT_TRUE(std::isinf(state_gap(std::vector<double>{0.4})));
    EXPECT_DOUBLE_EQ(state_gap(std::vector<double>{0.4, 0.4}), 0.0);
    EXPECT_DOUBLE_EQ(state_gap(std::vector<double>{0.4, 0.4 + 1e-12}), 0.0);
    EXPECT_NEAR(state_gap(std::vector<double>{0.4, 0.4 + 1e-12}, 0.0), 1e-12, 1e-15);
}

TEST(Properties, RandomInstancesAgreeWithOracles) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const LayeredMdp m = random_mdp(seed, test::small_options());
        const Table q = optimal_q(m);
        EXPECT_LE(max_bellman_residual(m, q), 1e-10);
        const Policy pi = greedy_policy(q);
        const auto bf = oracle::brute_force_optimal(m);
        EXPECT_NEAR(policy_value(m, pi), bf.value, 1e-10) << seed;
        EXPECT_NEAR(greedy_values(m, q)[0][m.initial_state], bf.value, 1e-10);

        const Table d = occupancy(m, Policy::uniform(m.shape()));
        for (std::size_t h = 0; h < m.horizon; ++h) EXPECT_NEAR(d.layer_sum(h), 1.0, 1e-12);
        EXPECT_TRUE(check_table(d).empty());
    }
}

TEST(Properties, DisagreementMatchesTrajectoryEnumeration) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const LayeredMdp m = random_mdp(seed, test::small_options());
        Rng rng(seed + 1000);
        const Table f = test::random_table(m.shape(), rng);
        const Table g = test::random_table(m.shape(), rng);
        const Policy a = greedy_policy(f);
        const Policy b = greedy_policy(g);
        std::vector<std::vector<std::size_t>> aa(m.horizon), bb(m.horizon);
        for (std::size_t h = 0; h < m.horizon; ++h)
            for (std::size_t x = 0; x < m.num_states(h); ++x) {
                aa[h].push_back(a.action(h, x));
                bb[h].push_back(b.action(h, x));
            }
        EXPECT_NEAR(policy_disagreement(m, a, b), oracle::tree_disagreement(m, aa, bb), 1e-12);
        EXPECT_NEAR(policy_value(m, a), oracle::tree_value(m, aa), 1e-12);
    }
}

TEST(Properties, PerturbingNonArgmaxBelowGapKeepsGreedy) {
    Rng rng(5);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const LayeredMdp m = random_mdp(seed, test::small_options());
        const Table f = test::random_table(m.shape(), rng);
        const Policy pi = greedy_policy(f);
        Table g = f;
        for (std::size_t h = 0; h < m.horizon; ++h)
            for (std::size_t x = 0; x < m.num_states(h); ++x) {
                const double gap = state_gap(f.row(h, x));
                if (!std::isfinite(gap)) continue;
                for (std::size_t a = 0; a < m.num_actions(h, x); ++a)
                    if (a != pi.action(h, x)) g(h, x, a) += 0.99 * gap * rng.uniform();
            }
        EXPECT_TRUE(greedy_policy(g).same_actions(pi)) << seed;
    }
}

TEST(Properties, AddingMembersNeverIncreasesClassGap) {
    Rng rng(8);
    const LayeredMdp m = random_mdp(4, test::small_options());
    std::vector<Table> members;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k) {
        members.push_back(test::random_table(m.shape(), rng));
        const double g = gap_of_class(members);
        EXPECT_LE(g, previous);
        previous = g;
    }
}

TEST(BellmanOperators, BackupAndResidual) {
    const auto inst = build_counterexample();
    const Table q = optimal_q(inst.mdp);
    EXPECT_EQ(bellman_backup(inst.mdp, q), q);
    EXPECT_DOUBLE_EQ(bellman_residual(inst.mdp, q).max_abs(), 0.0);
    const Table r = bellman_residual(inst.mdp, inst.F[1]);
    EXPECT_DOUBLE_EQ(r.max_abs(), 1.0);
}
