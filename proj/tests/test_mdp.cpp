#include <gtest/gtest.h>

#include <algorithm>

#include "pabc/mdp.hpp"
#include "test_helpers.hpp"

using namespace pabc;

namespace {

std::size_t count_kind(const std::vector<ValidationIssue>& issues, ValidationIssue::Kind k) {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [&](const ValidationIssue& i) { return i.kind == k; }));
}

LayeredMdp two_state_layer() {
    LayeredMdp m;
    m.horizon = 2;
    m.layers = {{"x0"}, {"y0", "y1"}, {"z"}};
    m.actions = {{{"l", "r"}}, {{"a"}, {"a", "b"}}};
    m.transitions = {{{{1.0, 0.0}, {0.3, 0.7}}}, {{{1.0}}, {{1.0}, {1.0}}}};
    m.rewards = {{{0.0, 0.2}}, {{1.0}, {0.5, 0.1}}};
    return m;
}

}  // namespace

TEST(Validate, WellFormedChainHasNoIssues) {
    EXPECT_TRUE(validate_mdp(test::chain(2)).empty());
    EXPECT_TRUE(validate_mdp(two_state_layer()).empty());
}

TEST(Validate, RowSumViolation) {
    auto m = two_state_layer();
    m.transitions[0][0][1] = {0.2, 0.7};
    const auto issues = validate_mdp(m);
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_EQ(issues[0].kind, ValidationIssue::Kind::row_sum);
}

TEST(Validate, RewardRangeViolation) {
    auto m = two_state_layer();
    m.rewards[1][1][0] = 1.5;
    const auto issues = validate_mdp(m);
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_EQ(issues[0].kind, ValidationIssue::Kind::reward_range);
}

TEST(Validate, NegativeProbabilityAndStructure) {
    auto m = two_state_layer();
    m.transitions[0][0][1] = {-0.5, 1.5};
    EXPECT_EQ(count_kind(validate_mdp(m), ValidationIssue::Kind::negative_probability), 1u);

    auto s = two_state_layer();
    s.transitions[1][1].pop_back();
    EXPECT_GE(count_kind(validate_mdp(s), ValidationIssue::Kind::structure), 1u);
    EXPECT_THROW(require_valid(s), std::invalid_argument);

    auto i = two_state_layer();
    i.initial_state = 4;
    EXPECT_GE(count_kind(validate_mdp(i), ValidationIssue::Kind::initial_state), 1u);
}

TEST(Mdp, LookupByName) {
    const auto m = two_state_layer();
    EXPECT_EQ(m.find_state("y1"), std::make_pair(std::size_t{1}, std::size_t{1}));
    EXPECT_FALSE(m.find_state("nope"));
    EXPECT_EQ(m.find_action(0, 0, "r"), 1u);
    EXPECT_FALSE(m.find_action(0, 0, "b"));
    EXPECT_EQ(m.shape(), (Shape{{2}, {1, 2}}));
}

TEST(TableTest, ShapeSumsAndRoles) {
    const Shape shape{{2}, {1, 2}};
    Table t(shape, TableRole::data_distribution);
    t(0, 0, 0) = 0.25;
    t(0, 0, 1) = 0.75;
    t(1, 0, 0) = 0.5;
    t(1, 1, 1) = 0.5;
    EXPECT_TRUE(t.same_shape(shape));
    EXPECT_FALSE(t.same_shape(Shape{{2}, {2, 2}}));
    EXPECT_DOUBLE_EQ(t.layer_sum(0), 1.0);
    EXPECT_DOUBLE_EQ(t.max_abs(), 0.75);
    EXPECT_TRUE(check_table(t).empty());
    t(1, 1, 1) = 0.4;
    EXPECT_FALSE(check_table(t).empty());

    Table w(shape, TableRole::weight, 1.0);
    EXPECT_TRUE(check_table(w).empty());
    w(0, 0, 0) = -1.0;
    EXPECT_FALSE(check_table(w).empty());
}

TEST(TableTest, RoleStrings) {
    for (auto r : {TableRole::value, TableRole::weight, TableRole::occupancy, TableRole::data_distribution})
        EXPECT_EQ(table_role_from_string(to_string(r)), r);
    EXPECT_EQ(to_string(TableRole::data_distribution), "data-distribution");
    for (auto r : {TieRule::first_index, TieRule::last_index, TieRule::explicit_choice})
        EXPECT_EQ(tie_rule_from_string(to_string(r)), r);
    EXPECT_THROW(tie_rule_from_string("random"), std::invalid_argument);
}

TEST(PolicyTest, DeterministicAndUniform) {
    const Shape shape{{2}, {1, 2}};
    const auto pi = Policy::deterministic({{1}, {0, 1}}, shape);
    EXPECT_TRUE(pi.is_deterministic());
    EXPECT_EQ(pi.action(0, 0), 1u);
    EXPECT_DOUBLE_EQ(pi.prob(1, 1, 1), 1.0);
    EXPECT_TRUE(check_policy(pi, shape).empty());

    const auto u = Policy::uniform(shape);
    EXPECT_FALSE(u.is_deterministic());
    EXPECT_DOUBLE_EQ(u.prob(1, 1, 0), 0.5);
    EXPECT_THROW(static_cast<void>(u.action(0, 0)), std::logic_error);
    EXPECT_TRUE(check_policy(u, shape).empty());

    EXPECT_THROW(Policy::deterministic({{2}, {0, 1}}, shape), std::invalid_argument);
    const auto bad = Policy::stochastic({{{0.5, 0.4}}, {{1.0}, {0.5, 0.5}}});
    EXPECT_FALSE(check_policy(bad, shape).empty());
}

TEST(PolicyTest, SameActions) {
    const Shape shape{{2}, {1, 2}};
    const auto a = Policy::deterministic({{1}, {0, 1}}, shape);
    const auto b = Policy::deterministic({{1}, {0, 1}}, shape);
    const auto c = Policy::deterministic({{0}, {0, 1}}, shape);
    EXPECT_TRUE(a.same_actions(b));
    EXPECT_FALSE(a.same_actions(c));
}
