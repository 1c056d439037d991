#include <gtest/gtest.h>

#include <cmath>

#include "pabc/data.hpp"
#include "pabc/dynamic_programming.hpp"
#include "pabc/instances.hpp"
#include "pabc/rng.hpp"
#include "test_helpers.hpp"

using namespace pabc;

namespace {

LayeredMdp two_armed() {
    LayeredMdp m;
    m.horizon = 1;
    m.layers = {{"x"}, {"end"}};
    m.actions = {{{"a", "b"}}};
    m.transitions = {{{{1.0}, {1.0}}}};
    m.rewards = {{{0.3, 0.6}}};
    return m;
}

Table dist(const LayeredMdp& m, std::vector<double> layer0) {
    Table d(m.shape(), TableRole::data_distribution);
    for (std::size_t a = 0; a < layer0.size(); ++a) d(0, 0, a) = layer0[a];
    return d;
}

}  // namespace

TEST(Sample, DegenerateMdpGivesIdenticalTuples) {
    const auto m = test::chain(2, 0.25);
    Table d(m.shape(), TableRole::data_distribution, 1.0);
    const Dataset ds = sample_dataset(m, d, 20, 1);
    ASSERT_EQ(ds.horizon(), 2u);
    for (const auto& step : ds.timesteps) {
        ASSERT_EQ(step.size(), 20u);
        for (const auto& t : step) EXPECT_EQ(t, step.front());
    }
    EXPECT_TRUE(check_dataset(m, ds).empty());
}

TEST(Sample, ActionFrequencyMatchesDistribution) {
    const auto inst = build_table1_example();
    const std::size_t n = 100000;
    const Dataset ds = sample_dataset(inst.mdp, inst.data_dist, n, 2024);
    std::size_t count_m = 0, count_l = 0;
    for (const auto& t : ds.timesteps[0]) {
        count_m += t.action == 1;
        count_l += t.action == 0;
    }
    const double se = std::sqrt(0.25 / n);
    EXPECT_NEAR(static_cast<double>(count_m) / n, 0.5, 3 * se);
    EXPECT_EQ(count_l, 0u);
}

TEST(Sample, SeedDeterminism) {
    const auto inst = random_instance(3, test::small_options());
    const Dataset a = sample_dataset(inst.mdp, inst.data_dist, 200, 17);
    const Dataset b = sample_dataset(inst.mdp, inst.data_dist, 200, 17);
    const Dataset c = sample_dataset(inst.mdp, inst.data_dist, 200, 18);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Sample, RejectsBadInput) {
    const auto inst = build_table1_example();
    EXPECT_THROW(sample_dataset(inst.mdp, inst.data_dist, 0, 1), std::invalid_argument);
    Table bad = inst.data_dist;
    bad(0, 0, 1) = 0.9;
    EXPECT_FALSE(check_data_distribution(inst.mdp, bad).empty());
    EXPECT_THROW(sample_dataset(inst.mdp, bad, 10, 1), std::invalid_argument);
}

TEST(Sample, CheckDatasetFlagsWrongReward) {
    const auto inst = build_table1_example();
    Dataset ds = sample_dataset(inst.mdp, inst.data_dist, 5, 1);
    ds.timesteps[0][2].reward += 0.1;
    EXPECT_FALSE(check_dataset(inst.mdp, ds).empty());
}

TEST(Sample, CellFrequenciesConvergeOnRandomInstance) {
    RandomOptions o = test::small_options();
    o.min_horizon = 2;
    const auto inst = random_instance(21, o);
    const std::size_t n = 100000;
    const Dataset ds = sample_dataset(inst.mdp, inst.data_dist, n, 5);
    for (std::size_t h = 0; h < inst.mdp.horizon; ++h) {
        Table counts(inst.mdp.shape(), TableRole::value);
        for (const auto& t : ds.timesteps[h]) counts(h, t.state, t.action) += 1.0;
        for (std::size_t x = 0; x < inst.mdp.num_states(h); ++x)
            for (std::size_t a = 0; a < inst.mdp.num_actions(h, x); ++a) {
                const double p = inst.data_dist(h, x, a);
                EXPECT_NEAR(counts(h, x, a) / n, p, 3 * std::sqrt(p * (1 - p) / n) + 1e-12);
            }
    }
}

TEST(Ratio, EqualDistributionsGiveOnesOnSupport) {
    const auto m = two_armed();
    const Policy pi = Policy::uniform(m.shape());
    const Table d = occupancy(m, pi);
    const auto r = density_ratio(m, pi, d);
    ASSERT_TRUE(r.exists());
    EXPECT_DOUBLE_EQ((*r.weights)(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ((*r.weights)(0, 0, 1), 1.0);
    EXPECT_DOUBLE_EQ(concentrability(m, pi, d), 1.0);
}

TEST(Ratio, UncoveredOptimalAction) {
    const auto inst = build_table1_example();
    const Policy star = greedy_policy(optimal_q(inst.mdp));
    const auto r = density_ratio(inst.mdp, star, inst.data_dist);
    EXPECT_FALSE(r.exists());
    ASSERT_TRUE(r.uncovered);
    EXPECT_EQ(r.uncovered->a, 0u);
    EXPECT_TRUE(std::isinf(concentrability(inst.mdp, star, inst.data_dist)));
}

TEST(Ratio, CounterexampleIndicatorWeights) {
    const auto inst = build_counterexample();
    const Policy star = greedy_policy(optimal_q(inst.mdp));
    const auto r = density_ratio(inst.mdp, star, inst.data_dist);
    ASSERT_TRUE(r.exists());
    const Table& w = *r.weights;
    const auto x0 = inst.mdp.find_state("x0")->second;
    const auto xA = inst.mdp.find_state("xA")->second;
    const auto xC = inst.mdp.find_state("xC")->second;
    double total = 0.0;
    for (std::size_t h = 0; h < w.horizon(); ++h) total += w.layer_sum(h);
    EXPECT_DOUBLE_EQ(total, 3.0);
    EXPECT_DOUBLE_EQ(w(0, x0, *inst.mdp.find_action(0, x0, "L1")), 1.0);
    EXPECT_DOUBLE_EQ(w(1, xA, 0), 1.0);
    EXPECT_DOUBLE_EQ(w(2, xC, 0), 1.0);
}

TEST(Ratio, HalfCoverageGivesTwo) {
    const auto m = two_armed();
    const Policy pi = Policy::deterministic({{0}}, m.shape());
    EXPECT_DOUBLE_EQ(concentrability(m, pi, dist(m, {0.5, 0.5})), 2.0);
}

TEST(Ratio, ZeroOverZeroIsZero) {
    const auto m = two_armed();
    const Policy pi = Policy::deterministic({{0}}, m.shape());
    const auto r = density_ratio(m, pi, dist(m, {1.0, 0.0}));
    ASSERT_TRUE(r.exists());
    EXPECT_DOUBLE_EQ((*r.weights)(0, 0, 1), 0.0);
}

TEST(BoundC, MaxSemantics) {
    const Shape shape{{3}};
    EXPECT_DOUBLE_EQ(class_bound_C(std::vector<Table>{Table(shape, TableRole::weight, 1.0)}), 1.0);
    EXPECT_DOUBLE_EQ(build_table1_example().W.bound_C(), 1.0);
    Table a(shape, TableRole::weight, 1.0), b(shape, TableRole::weight, 0.0);
    b(0, 0, 2) = 3.0;
    EXPECT_DOUBLE_EQ(class_bound_C(std::vector<Table>{a, b}), 3.0);
    EXPECT_THROW(class_bound_C(std::vector<Table>{}), std::invalid_argument);
}

TEST(Properties, ImportanceWeightingIdentity) {
    RandomOptions o = test::small_options();
    Rng rng(31);
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto inst = random_instance(seed, o);
        const Policy pi = Policy::uniform(inst.mdp.shape());
        const auto r = density_ratio(inst.mdp, pi, inst.data_dist);
        if (!r.exists()) continue;
        ++checked;
        const Table dpi = occupancy(inst.mdp, pi);
        const Table g = test::random_table(inst.mdp.shape(), rng, -1.0, 1.0);
        for (std::size_t h = 0; h < inst.mdp.horizon; ++h)
            EXPECT_NEAR(weighted_expectation(inst.data_dist, *r.weights, g, h), expectation(dpi, g, h), 1e-12);
        EXPECT_GE(concentrability(inst.mdp, pi, inst.data_dist), 1.0 - 1e-12);
    }
    EXPECT_GT(checked, 20u);
}
