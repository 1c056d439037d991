#include <gtest/gtest.h>

#include <cmath>

#include "pabc/data.hpp"
#include "pabc/dynamic_programming.hpp"
#include "pabc/instances.hpp"
#include "pabc/online.hpp"
#include "pabc/rng.hpp"
#include "test_helpers.hpp"

using namespace pabc;

namespace {

// One step, two arms with rewards 0.9 and 0.4: gap(Q*) = 0.5 = H / 2.
NamedInstance half_gap_instance() {
    NamedInstance inst;
    inst.name = "half-gap";
    auto& m = inst.mdp;
    m.horizon = 1;
    m.layers = {{"x"}, {"end"}};
    m.actions = {{{"a", "b"}}};
    m.transitions = {{{{1.0}, {1.0}}}};
    m.rewards = {{{0.9, 0.4}}};
    inst.data_dist = Table(m.shape(), TableRole::data_distribution, 0.5);
    Table q = optimal_q(m);
    Table f(m.shape(), TableRole::value);
    f(0, 0, 0) = 0.4;
    f(0, 0, 1) = 0.9;
    Table wstar(m.shape(), TableRole::weight);
    wstar(0, 0, 0) = 2.0;
    inst.F = FunctionClass({{"Q*", q}, {"swap", f}});
    inst.W = WeightClass({{"w*", wstar}, {"ones", Table(m.shape(), TableRole::weight, 1.0)}});
    inst.annotations = annotate(inst);
    return inst;
}

OaTranscript run_oa(const NamedInstance& inst, std::size_t n, std::uint64_t seed, OaConfig cfg = {}) {
    const Dataset d = sample_dataset(inst.mdp, inst.data_dist, n, seed);
    Simulator sim(inst.mdp);
    cfg.seed = derive_seed(seed, 1);
    return pabc_oa(inst.F, inst.W, LossSource::empirical(inst.mdp, d), sim, cfg);
}

}  // namespace

TEST(MonteCarlo, DeterministicMdpIsExact) {
    const auto m = test::chain(3, 0.25);
    const Policy pi = Policy::uniform(m.shape());
    for (std::size_t k : {1u, 7u, 100u}) EXPECT_DOUBLE_EQ(monte_carlo_eval(m, pi, k, 4), 0.75);
}

TEST(MonteCarlo, CounterexampleSingleRollout) {
    const auto cx = build_counterexample();
    EXPECT_DOUBLE_EQ(monte_carlo_eval(cx.mdp, greedy_policy(cx.F[0]), 1, 0), 1.0);
}

TEST(MonteCarlo, StochasticInstanceConverges) {
    RandomOptions o = test::small_options();
    o.min_horizon = o.max_horizon = 3;
    const LayeredMdp m = random_mdp(13, o);
    const Policy pi = Policy::uniform(m.shape());
    const std::size_t rollouts = 100000;
    EXPECT_NEAR(monte_carlo_eval(m, pi, rollouts, 1), policy_value(m, pi), 3.0 * 3.0 / std::sqrt(double(rollouts)));
}

TEST(MonteCarlo, SimulatorCountsEpisodesAndIsSeeded) {
    const auto cx = build_counterexample();
    Simulator sim(cx.mdp);
    const Policy pi = Policy::uniform(cx.mdp.shape());
    const Trajectory a = sim.rollout(pi, 5);
    const Trajectory b = sim.rollout(pi, 5);
    EXPECT_EQ(a.actions, b.actions);
    EXPECT_EQ(a.rewards.size(), cx.mdp.horizon);
    monte_carlo_eval(sim, pi, 10, 3);
    EXPECT_EQ(sim.episodes(), 12u);
}

TEST(McCount, FormulaExample) {
    EXPECT_EQ(mc_sample_count(0.5, 1, 0.1, 0), 39u);
    EXPECT_EQ(mc_rollout_count(0.5, 1, 0.1, 0), 39u);
    EXPECT_EQ(mc_sample_count(0.5, 2, 0.1, 0), std::size_t(std::ceil(16.0 * std::log(120.0) / 0.25)));
}

TEST(McCount, ScalingInEpsilonAndIteration) {
    const std::size_t base = mc_rollout_count(0.2, 3, 0.1, 2);
    const std::size_t half = mc_rollout_count(0.1, 3, 0.1, 2);
    EXPECT_NEAR(double(half) / double(base), 4.0, 4.0 / double(base));
    const double log_ratio = std::log(12.0 * 8 / 0.1) / std::log(12.0 * 4 / 0.1);
    EXPECT_NEAR(double(mc_rollout_count(0.01, 2, 0.1, 3)) / double(mc_rollout_count(0.01, 2, 0.1, 2)), log_ratio, 1e-4);
    EXPECT_THROW(mc_rollout_count(0.0, 1, 0.1, 0), std::invalid_argument);
}

TEST(Oa, ScheduleMatchesFormulas) {
    const auto inst = half_gap_instance();
    OaConfig cfg;
    cfg.max_iterations = 6;
    const std::size_t n = 50;
    const Dataset d = sample_dataset(inst.mdp, inst.data_dist, n, 1);
    Simulator sim(inst.mdp);
    const auto tr = pabc_oa(inst.F, inst.W, LossSource::empirical(inst.mdp, d), sim, cfg);
    for (const auto& it : tr.iterations) {
        EXPECT_EQ(it.gap_guess, 1.0 / std::ldexp(1.0, int(it.t)));
        const double iota = std::log(24.0 * 2 * 2 * 1 * std::exp2(double(it.t)) / 0.1);
        EXPECT_DOUBLE_EQ(it.iota, iota);
        EXPECT_DOUBLE_EQ(it.eps, std::sqrt(8.0 * 4.0 * iota / (n * it.gap_guess * it.gap_guess)));
        EXPECT_DOUBLE_EQ(it.alpha_value, it.eps / 2.0);
        EXPECT_DOUBLE_EQ(it.alpha_policy, it.eps * it.gap_guess / 2.0);
        EXPECT_EQ(it.samples, it.rollouts * inst.mdp.horizon);
    }
    std::size_t total = 0;
    for (const auto& it : tr.iterations) total += it.samples;
    EXPECT_EQ(total, tr.total_online_samples);
}

TEST(Oa, HalfGapTerminatesByIterationTwo) {
    const auto inst = half_gap_instance();
    ASSERT_DOUBLE_EQ(inst.annotations.gap_q_star, 0.5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto tr = run_oa(inst, 2000, seed);
        ASSERT_TRUE(tr.stopped) << seed;
        EXPECT_LE(tr.iterations.back().t, 2u) << seed;
        EXPECT_EQ(*tr.final_member, 0u);
    }
}

TEST(Oa, SingletonClassesReturnOptimalPolicy) {
    const auto inst = random_instance(17, test::small_options());
    const std::vector<std::size_t> first{0};
    NamedInstance small = inst;
    small.F = inst.F.subset(first);
    small.W = inst.W.subset(first);
    const auto tr = run_oa(small, 500, 2);
    ASSERT_TRUE(tr.stopped);
    EXPECT_NEAR(policy_value(inst.mdp, *tr.final_policy), inst.annotations.v_star, 1e-12);
}

TEST(Oa, CounterexampleEventuallyReturnsOptimal) {
    const auto cx = build_counterexample();
    OaConfig cfg;
    cfg.greedy = cx.greedy;
    cfg.member_tie = cx.member_tie;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto tr = run_oa(cx, 2000, seed, cfg);
        ASSERT_TRUE(tr.stopped);
        EXPECT_EQ(cx.F.name(*tr.final_member), "Q*");
        EXPECT_DOUBLE_EQ(policy_value(cx.mdp, *tr.final_policy), 1.0);
        EXPECT_FALSE(tr.iterations.front().note.empty());
    }
}

TEST(Oa, MaxClassGapStartsLower) {
    const auto cx = build_counterexample();
    OaConfig cfg;
    cfg.initial_guess = InitialGuess::max_class_gap;
    const auto tr = run_oa(cx, 2000, 1, cfg);
    EXPECT_DOUBLE_EQ(tr.initial_gap_guess, 1.0);
    EXPECT_TRUE(tr.stopped);
}

TEST(Oa, IterationCapAndInputErrors) {
    const auto inst = half_gap_instance();
    OaConfig cfg;
    cfg.max_iterations = 1;
    const auto tr = run_oa(inst, 3, 1, cfg);
    if (!tr.stopped) EXPECT_TRUE(tr.cap_reached);
    EXPECT_EQ(tr.iterations.size(), 1u);

    Simulator sim(inst.mdp);
    EXPECT_THROW(pabc_oa(inst.F, inst.W, LossSource::population(inst.mdp, inst.data_dist), sim, {}),
                 std::invalid_argument);
    cfg.max_iterations = 0;
    const Dataset d = sample_dataset(inst.mdp, inst.data_dist, 5, 1);
    EXPECT_THROW(pabc_oa(inst.F, inst.W, LossSource::empirical(inst.mdp, d), sim, cfg), std::invalid_argument);
}

TEST(Oa, BoundsFormulas) {
    const double iota = std::log(24.0 * 4 * 2 * 2 * 2.0 / 0.1);  // t = log2(2H/gap) = 1
    EXPECT_DOUBLE_EQ(oa_suboptimality_bound(1000, 1.0, 2, 4, 2, 0.1, 2.0),
                     5.0 * std::sqrt(32.0 * 64.0 * iota / (1000 * 4.0)));
    EXPECT_DOUBLE_EQ(oa_online_budget(1000, 1.0, 2, 0.1, 1.0), 4.0 * 1000 * std::log(240.0) / 2.0);
    EXPECT_THROW(oa_online_budget(1000, 1.0, 2, 0.1, 0.0), std::invalid_argument);
    EXPECT_EQ(initial_guess_from_string(to_string(InitialGuess::max_class_gap)), InitialGuess::max_class_gap);
}
