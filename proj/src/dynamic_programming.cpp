#include "pabc/dynamic_programming.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pabc {

namespace {

void require_shape(const LayeredMdp& mdp, const Table& t, const char* what) {
    if (!t.same_shape(mdp.shape())) throw std::invalid_argument(std::string(what) + " does not match the MDP shape");
}

}  // namespace

StateValues greedy_values(const LayeredMdp& mdp, const Table& f) {
    require_shape(mdp, f, "value table");
    StateValues v(mdp.horizon + 1);
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
        v[h].resize(mdp.num_states(h));
        for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
            const auto row = f.row(h, x);
            v[h][x] = *std::max_element(row.begin(), row.end());
        }
    }
    v[mdp.horizon].assign(mdp.num_states(mdp.horizon), 0.0);
    return v;
}

Table bellman_backup(const LayeredMdp& mdp, const Table& f) {
    const StateValues v = greedy_values(mdp, f);
    Table out(mdp.shape(), TableRole::value);
    for (std::size_t h = 0; h < mdp.horizon; ++h)
        for (std::size_t x = 0; x < mdp.num_states(h); ++x)
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
                const auto p = mdp.next_state_probs(h, x, a);
                double expected = 0.0;
                for (std::size_t y = 0; y < p.size(); ++y) expected += p[y] * v[h + 1][y];
                out(h, x, a) = mdp.reward(h, x, a) + expected;
            }
    return out;
}

Table bellman_residual(const LayeredMdp& mdp, const Table& f) {
    Table out = bellman_backup(mdp, f);
    for (std::size_t h = 0; h < mdp.horizon; ++h)
        for (std::size_t x = 0; x < mdp.num_states(h); ++x)
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) out(h, x, a) = f(h, x, a) - out(h, x, a);
    return out;
}

Table optimal_q(const LayeredMdp& mdp) {
    require_valid(mdp);
    Table q(mdp.shape(), TableRole::value);
    std::vector<double> next_v(mdp.num_states(mdp.horizon), 0.0);
    for (std::size_t h = mdp.horizon; h-- > 0;) {
        std::vector<double> v(mdp.num_states(h), 0.0);
        for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
                const auto p = mdp.next_state_probs(h, x, a);
                double expected = 0.0;
                for (std::size_t y = 0; y < p.size(); ++y) expected += p[y] * next_v[y];
                q(h, x, a) = mdp.reward(h, x, a) + expected;
                best = std::max(best, q(h, x, a));
            }
            v[x] = best;
        }
        next_v = std::move(v);
    }
    return q;
}

namespace {

std::size_t greedy_action(std::span<const double> row, const GreedyRule& rule, std::size_t h, std::size_t x) {
    const double best = *std::max_element(row.begin(), row.end());
    const double cutoff = best - rule.tolerance;
    switch (rule.rule) {
        case TieRule::last_index:
            for (std::size_t a = row.size(); a-- > 0;)
                if (row[a] >= cutoff) return a;
            break;
        case TieRule::explicit_choice: {
            auto it = rule.preferred.find({h, x});
            if (it != rule.preferred.end() && it->second < row.size() && row[it->second] >= cutoff) return it->second;
            [[fallthrough]];
        }
        case TieRule::first_index:
            for (std::size_t a = 0; a < row.size(); ++a)
                if (row[a] >= cutoff) return a;
            break;
    }
    return 0;
}

}  // namespace

Policy greedy_policy(const Table& f, const GreedyRule& rule) {
    std::vector<std::vector<std::size_t>> actions(f.horizon());
    for (std::size_t h = 0; h < f.horizon(); ++h) {
        actions[h].resize(f.num_states(h));
        for (std::size_t x = 0; x < f.num_states(h); ++x) actions[h][x] = greedy_action(f.row(h, x), rule, h, x);
    }
    Policy p = Policy::deterministic(std::move(actions), f.shape());
    p.set_tie_rule(rule.rule);
    return p;
}

PolicyEvaluation evaluate_policy(const LayeredMdp& mdp, const Policy& pi) {
    require_valid(mdp);
    const auto problems = check_policy(pi, mdp.shape());
    if (!problems.empty()) throw std::invalid_argument("invalid policy: " + problems.front());

    PolicyEvaluation ev;
    ev.q_values = Table(mdp.shape(), TableRole::value);
    ev.state_values.resize(mdp.horizon + 1);
    ev.state_values[mdp.horizon].assign(mdp.num_states(mdp.horizon), 0.0);
    for (std::size_t h = mdp.horizon; h-- > 0;) {
        const auto& next_v = ev.state_values[h + 1];
        auto& v = ev.state_values[h];
        v.assign(mdp.num_states(h), 0.0);
        for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
                const auto p = mdp.next_state_probs(h, x, a);
                double expected = 0.0;
                for (std::size_t y = 0; y < p.size(); ++y) expected += p[y] * next_v[y];
                ev.q_values(h, x, a) = mdp.reward(h, x, a) + expected;
                v[x] += pi.prob(h, x, a) * ev.q_values(h, x, a);
            }
        }
    }
    ev.value = ev.state_values[0][mdp.initial_state];
    return ev;
}

double policy_value(const LayeredMdp& mdp, const Policy& pi) { return evaluate_policy(mdp, pi).value; }

Table occupancy(const LayeredMdp& mdp, const Policy& pi) {
    require_valid(mdp);
    const auto problems = check_policy(pi, mdp.shape());
    if (!problems.empty()) throw std::invalid_argument("invalid policy: " + problems.front());

    Table d(mdp.shape(), TableRole::occupancy);
    std::vector<double> state_dist(mdp.num_states(0), 0.0);
    state_dist[mdp.initial_state] = 1.0;
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
        std::vector<double> next(mdp.num_states(h + 1), 0.0);
        for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
            if (state_dist[x] == 0.0) continue;
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
                const double mass = state_dist[x] * pi.prob(h, x, a);
                d(h, x, a) = mass;
                if (mass == 0.0) continue;
                const auto p = mdp.next_state_probs(h, x, a);
                for (std::size_t y = 0; y < p.size(); ++y) next[y] += mass * p[y];
            }
        }
        state_dist = std::move(next);
    }
    return d;
}

double state_gap(std::span<const double> row, double tie_tolerance) {
    if (row.size() <= 1) return std::numeric_limits<double>::infinity();
    const auto best_it = std::max_element(row.begin(), row.end());
    const double best = *best_it;
    double runner_up = -std::numeric_limits<double>::infinity();
    for (auto it = row.begin(); it != row.end(); ++it)
        if (it != best_it) runner_up = std::max(runner_up, *it);
    const double margin = best - runner_up;
    if (margin <= tie_tolerance) return 0.0;
    return margin;
}

double gap_of_function(const Table& f, double tie_tolerance) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < f.horizon(); ++h)
        for (std::size_t x = 0; x < f.num_states(h); ++x) g = std::min(g, state_gap(f.row(h, x), tie_tolerance));
    return g;
}

double gap_of_class(std::span<const Table> members, double tie_tolerance) {
    if (members.empty()) throw std::invalid_argument("gap of an empty class is undefined");
    double g = std::numeric_limits<double>::infinity();
    for (const auto& f : members) g = std::min(g, gap_of_function(f, tie_tolerance));
    return g;
}

double policy_disagreement(const LayeredMdp& mdp, const Policy& pi_a, const Policy& pi_b) {
    if (!pi_a.is_deterministic() || !pi_b.is_deterministic())
        throw std::invalid_argument("policy_disagreement requires deterministic policies");
    const Table d = occupancy(mdp, pi_b);
    double total = 0.0;
    for (std::size_t h = 0; h < mdp.horizon; ++h)
        for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
            if (pi_a.action(h, x) == pi_b.action(h, x)) continue;
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) total += d(h, x, a);
        }
    return total;
}

double max_bellman_residual(const LayeredMdp& mdp, const Table& f) {
    return bellman_residual(mdp, f).max_abs();
}

}  // namespace pabc
