#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pabc {

/// Number of available actions for each (h, x) with h in [0, H).
using Shape = std::vector<std::vector<std::size_t>>;

/// Finite-horizon episodic MDP whose states are partitioned into layers.
///
/// `layers` holds H + 1 state lists; the last one is the terminal layer and
/// has no actions, rewards or transitions. Rewards are deterministic and the
/// initial state is fixed. Transition rows are dense over the next layer.
struct LayeredMdp {
    std::size_t horizon = 0;
    std::vector<std::vector<std::string>> layers;
    std::vector<std::vector<std::vector<std::string>>> actions;               // [h][x] -> names
    std::vector<std::vector<std::vector<std::vector<double>>>> transitions;  // [h][x][a][x']
    std::vector<std::vector<std::vector<double>>> rewards;                   // [h][x][a]
    std::size_t initial_state = 0;

    std::size_t num_states(std::size_t h) const { return layers.at(h).size(); }
    std::size_t num_actions(std::size_t h, std::size_t x) const { return actions.at(h).at(x).size(); }
    std::span<const double> next_state_probs(std::size_t h, std::size_t x, std::size_t a) const {
        return transitions[h][x][a];
    }
    double reward(std::size_t h, std::size_t x, std::size_t a) const { return rewards[h][x][a]; }
    Shape shape() const;

    /// Locates a state by name. Names are unique across layers.
    std::optional<std::pair<std::size_t, std::size_t>> find_state(const std::string& name) const;
    std::optional<std::size_t> find_action(std::size_t h, std::size_t x, const std::string& name) const;
};

struct ValidationIssue {
    enum class Kind { structure, row_sum, negative_probability, reward_range, dangling_target, initial_state };
    Kind kind;
    std::string message;
};

/// Lists every violated invariant; an empty report means the MDP is valid.
std::vector<ValidationIssue> validate_mdp(const LayeredMdp& mdp, double row_tolerance = 1e-12);

/// Throws std::invalid_argument carrying the first issues when the MDP is invalid.
void require_valid(const LayeredMdp& mdp);

std::string to_string(ValidationIssue::Kind kind);

enum class TableRole { value, weight, occupancy, data_distribution };

std::string to_string(TableRole role);
TableRole table_role_from_string(const std::string& s);

/// Real value per (h, x, a) for h in [0, H). Layer H is never stored, which
/// encodes the f_H = 0 convention for value tables.
class Table {
public:
    Table() = default;
    Table(const Shape& shape, TableRole role, double fill = 0.0);

    double operator()(std::size_t h, std::size_t x, std::size_t a) const { return values_[h][x][a]; }
    double& operator()(std::size_t h, std::size_t x, std::size_t a) { return values_[h][x][a]; }

    std::span<const double> row(std::size_t h, std::size_t x) const { return values_[h][x]; }
    std::span<double> row(std::size_t h, std::size_t x) { return values_[h][x]; }

    std::size_t horizon() const { return values_.size(); }
    std::size_t num_states(std::size_t h) const { return values_[h].size(); }
    std::size_t num_actions(std::size_t h, std::size_t x) const { return values_[h][x].size(); }
    Shape shape() const;
    bool same_shape(const Shape& shape) const;

    TableRole role() const { return role_; }
    void set_role(TableRole role) { role_ = role; }

    /// Sum of entries at timestep h.
    double layer_sum(std::size_t h) const;
    /// Largest |entry| over all timesteps.
    double max_abs() const;

    friend bool operator==(const Table&, const Table&) = default;

private:
    std::vector<std::vector<std::vector<double>>> values_;
    TableRole role_ = TableRole::value;
};

/// Checks the role-specific invariants of a table (nonnegativity and
/// per-timestep normalization for distributions, nonnegativity for weights,
/// finiteness for values). Returns human readable violations.
std::vector<std::string> check_table(const Table& table, double tolerance = 1e-12);

enum class TieRule { first_index, last_index, explicit_choice };

std::string to_string(TieRule rule);
TieRule tie_rule_from_string(const std::string& s);

/// How greedy policies resolve near-ties. Actions within `tolerance` of the
/// maximum count as tied. With `explicit_choice`, a preferred action at
/// (h, x) is taken when it is among the tied actions; otherwise the first
/// tied action is used.
struct GreedyRule {
    TieRule rule = TieRule::first_index;
    double tolerance = 1e-9;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> preferred;
};

/// Deterministic or stochastic Markov policy over the layers [0, H).
class Policy {
public:
    Policy() = default;

    static Policy deterministic(std::vector<std::vector<std::size_t>> actions, const Shape& shape);
    static Policy stochastic(std::vector<std::vector<std::vector<double>>> probs);
    /// Uniform over the available actions at every state.
    static Policy uniform(const Shape& shape);

    bool is_deterministic() const { return !actions_.empty(); }
    std::size_t horizon() const { return probs_.size(); }
    std::size_t num_states(std::size_t h) const { return probs_[h].size(); }

    /// Action at (h, x); throws std::logic_error for stochastic policies.
    std::size_t action(std::size_t h, std::size_t x) const;
    double prob(std::size_t h, std::size_t x, std::size_t a) const { return probs_[h][x][a]; }
    std::span<const double> probs(std::size_t h, std::size_t x) const { return probs_[h][x]; }

    const std::optional<TieRule>& tie_rule() const { return tie_rule_; }
    void set_tie_rule(TieRule rule) { tie_rule_ = rule; }

    bool same_actions(const Policy& other) const;

private:
    std::vector<std::vector<std::vector<double>>> probs_;
    std::vector<std::vector<std::size_t>> actions_;
    std::optional<TieRule> tie_rule_;
};

/// Checks row sums (1e-12) and action membership.
std::vector<std::string> check_policy(const Policy& policy, const Shape& shape);

}  // namespace pabc
