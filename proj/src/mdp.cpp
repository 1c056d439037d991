#include "pabc/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pabc {

Shape LayeredMdp::shape() const {
    Shape s(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        s[h].resize(num_states(h));
        for (std::size_t x = 0; x < num_states(h); ++x) s[h][x] = num_actions(h, x);
    }
    return s;
}

std::optional<std::pair<std::size_t, std::size_t>> LayeredMdp::find_state(const std::string& name) const {
    for (std::size_t h = 0; h < layers.size(); ++h) {
        const auto& layer = layers[h];
        auto it = std::find(layer.begin(), layer.end(), name);
        if (it != layer.end()) return std::make_pair(h, static_cast<std::size_t>(it - layer.begin()));
    }
    return std::nullopt;
}

std::optional<std::size_t> LayeredMdp::find_action(std::size_t h, std::size_t x, const std::string& name) const {
    const auto& names = actions.at(h).at(x);
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

std::string to_string(ValidationIssue::Kind kind) {
    switch (kind) {
        case ValidationIssue::Kind::structure: return "structure";
        case ValidationIssue::Kind::row_sum: return "row-sum";
        case ValidationIssue::Kind::negative_probability: return "negative-probability";
        case ValidationIssue::Kind::reward_range: return "reward-range";
        case ValidationIssue::Kind::dangling_target: return "dangling-target";
        case ValidationIssue::Kind::initial_state: return "initial-state";
    }
    return "unknown";
}

std::vector<ValidationIssue> validate_mdp(const LayeredMdp& mdp, double row_tolerance) {
    using Kind = ValidationIssue::Kind;
    std::vector<ValidationIssue> issues;
    auto add = [&](Kind kind, const std::string& msg) { issues.push_back({kind, msg}); };

    if (mdp.horizon == 0) add(Kind::structure, "horizon must be positive");
    if (mdp.layers.size() != mdp.horizon + 1) {
        add(Kind::structure, "expected " + std::to_string(mdp.horizon + 1) + " layers (including the terminal layer), got " +
                                 std::to_string(mdp.layers.size()));
        return issues;
    }
    if (mdp.actions.size() != mdp.horizon || mdp.transitions.size() != mdp.horizon || mdp.rewards.size() != mdp.horizon) {
        add(Kind::structure, "actions, transitions and rewards must have one entry per timestep");
        return issues;
    }

    std::set<std::string> names;
    for (std::size_t h = 0; h <= mdp.horizon; ++h) {
        if (mdp.layers[h].empty()) add(Kind::structure, "layer " + std::to_string(h) + " is empty");
        for (const auto& n : mdp.layers[h])
            if (!names.insert(n).second) add(Kind::structure, "duplicate state name '" + n + "'");
    }

    for (std::size_t h = 0; h < mdp.horizon; ++h) {
        const std::size_t ns = mdp.layers[h].size();
        const std::size_t nn = mdp.layers[h + 1].size();
        if (mdp.actions[h].size() != ns || mdp.transitions[h].size() != ns || mdp.rewards[h].size() != ns) {
            add(Kind::structure, "timestep " + std::to_string(h) + ": per-state tables do not match the layer size");
            continue;
        }
        for (std::size_t x = 0; x < ns; ++x) {
            const std::string& sname = mdp.layers[h][x];
            const std::size_t na = mdp.actions[h][x].size();
            if (na == 0) add(Kind::structure, "state '" + sname + "' has no actions");
            if (mdp.transitions[h][x].size() != na || mdp.rewards[h][x].size() != na) {
                add(Kind::structure, "state '" + sname + "': transition/reward count differs from action count");
                continue;
            }
            for (std::size_t a = 0; a < na; ++a) {
                const std::string where = "(" + sname + ", " + mdp.actions[h][x][a] + ")";
                const double r = mdp.rewards[h][x][a];
                if (!(r >= 0.0 && r <= 1.0)) {
                    std::ostringstream os;
                    os << "reward " << r << " at " << where << " outside [0, 1]";
                    add(Kind::reward_range, os.str());
                }
                const auto& row = mdp.transitions[h][x][a];
                if (row.size() != nn) {
                    add(Kind::dangling_target, "transition row at " + where + " has " + std::to_string(row.size()) +
                                                   " entries but the next layer has " + std::to_string(nn) + " states");
                    continue;
                }
                double sum = 0.0;
                bool negative = false;
                for (double p : row) {
                    sum += p;
                    if (p < 0.0) negative = true;
                }
                if (negative) add(Kind::negative_probability, "negative transition probability at " + where);
                if (!(std::abs(sum - 1.0) <= row_tolerance)) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "transition row at " << where << " sums to " << sum;
                    add(Kind::row_sum, os.str());
                }
            }
        }
    }
    if (mdp.layers[0].empty() || mdp.initial_state >= mdp.layers[0].size())
        add(Kind::initial_state, "initial state index is not in layer 0");
    return issues;
}

void require_valid(const LayeredMdp& mdp) {
    const auto issues = validate_mdp(mdp);
    if (issues.empty()) return;
    std::string msg = "invalid MDP:";
    for (std::size_t i = 0; i < issues.size() && i < 5; ++i) msg += " [" + to_string(issues[i].kind) + "] " + issues[i].message + ";";
    throw std::invalid_argument(msg);
}

std::string to_string(TableRole role) {
    switch (role) {
        case TableRole::value: return "value";
        case TableRole::weight: return "weight";
        case TableRole::occupancy: return "occupancy";
        case TableRole::data_distribution: return "data-distribution";
    }
    return "value";
}

TableRole table_role_from_string(const std::string& s) {
    if (s == "value") return TableRole::value;
    if (s == "weight") return TableRole::weight;
    if (s == "occupancy") return TableRole::occupancy;
    if (s == "data-distribution") return TableRole::data_distribution;
    throw std::invalid_argument("unknown table role '" + s + "'");
}

Table::Table(const Shape& shape, TableRole role, double fill) : role_(role) {
    values_.resize(shape.size());
    for (std::size_t h = 0; h < shape.size(); ++h) {
        values_[h].resize(shape[h].size());
        for (std::size_t x = 0; x < shape[h].size(); ++x) values_[h][x].assign(shape[h][x], fill);
    }
}

Shape Table::shape() const {
    Shape s(values_.size());
    for (std::size_t h = 0; h < values_.size(); ++h) {
        s[h].resize(values_[h].size());
        for (std::size_t x = 0; x < values_[h].size(); ++x) s[h][x] = values_[h][x].size();
    }
    return s;
}

bool Table::same_shape(const Shape& shape) const { return this->shape() == shape; }

double Table::layer_sum(std::size_t h) const {
    double s = 0.0;
    for (const auto& row : values_[h])
        for (double v : row) s += v;
    return s;
}

double Table::max_abs() const {
    double m = 0.0;
    for (const auto& layer : values_)
        for (const auto& row : layer)
            for (double v : row) m = std::max(m, std::abs(v));
    return m;
}

std::vector<std::string> check_table(const Table& table, double tolerance) {
    std::vector<std::string> problems;
    for (std::size_t h = 0; h < table.horizon(); ++h) {
        bool negative = false;
        bool finite = true;
        for (std::size_t x = 0; x < table.num_states(h); ++x)
            for (double v : table.row(h, x)) {
                if (!std::isfinite(v)) finite = false;
                if (v < 0.0) negative = true;
            }
        const std::string at = "timestep " + std::to_string(h);
        if (!finite) problems.push_back(at + ": non-finite entry");
        switch (table.role()) {
            case TableRole::occupancy:
            case TableRole::data_distribution: {
                if (negative) problems.push_back(at + ": negative probability");
                const double s = table.layer_sum(h);
                if (!(std::abs(s - 1.0) <= tolerance)) {
                    std::ostringstream os;
                    os.precision(17);
                    os << at << ": entries sum to " << s;
                    problems.push_back(os.str());
                }
                break;
            }
            case TableRole::weight:
                if (negative) problems.push_back(at + ": negative weight");
                break;
            case TableRole::value: break;
        }
    }
    return problems;
}

std::string to_string(TieRule rule) {
    switch (rule) {
        case TieRule::first_index: return "first-index";
        case TieRule::last_index: return "last-index";
        case TieRule::explicit_choice: return "explicit-choice";
    }
    return "first-index";
}

TieRule tie_rule_from_string(const std::string& s) {
    if (s == "first-index") return TieRule::first_index;
    if (s == "last-index") return TieRule::last_index;
    if (s == "explicit-choice") return TieRule::explicit_choice;
    throw std::invalid_argument("unknown tie rule '" + s + "'");
}

Policy Policy::deterministic(std::vector<std::vector<std::size_t>> actions, const Shape& shape) {
    if (actions.size() != shape.size()) throw std::invalid_argument("policy horizon does not match shape");
    Policy p;
    p.probs_.resize(shape.size());
    for (std::size_t h = 0; h < shape.size(); ++h) {
        if (actions[h].size() != shape[h].size()) throw std::invalid_argument("policy layer size does not match shape");
        p.probs_[h].resize(shape[h].size());
        for (std::size_t x = 0; x < shape[h].size(); ++x) {
            if (actions[h][x] >= shape[h][x])
                throw std::invalid_argument("policy action index out of range at timestep " + std::to_string(h));
            p.probs_[h][x].assign(shape[h][x], 0.0);
            p.probs_[h][x][actions[h][x]] = 1.0;
        }
    }
    p.actions_ = std::move(actions);
    return p;
}

Policy Policy::stochastic(std::vector<std::vector<std::vector<double>>> probs) {
    Policy p;
    p.probs_ = std::move(probs);
    return p;
}

Policy Policy::uniform(const Shape& shape) {
    std::vector<std::vector<std::vector<double>>> probs(shape.size());
    for (std::size_t h = 0; h < shape.size(); ++h) {
        probs[h].resize(shape[h].size());
        for (std::size_t x = 0; x < shape[h].size(); ++x)
            probs[h][x].assign(shape[h][x], 1.0 / static_cast<double>(shape[h][x]));
    }
    return stochastic(std::move(probs));
}

std::size_t Policy::action(std::size_t h, std::size_t x) const {
    if (!is_deterministic()) throw std::logic_error("action() called on a stochastic policy");
    return actions_[h][x];
}

bool Policy::same_actions(const Policy& other) const {
    if (!is_deterministic() || !other.is_deterministic()) return probs_ == other.probs_;
    return actions_ == other.actions_;
}

std::vector<std::string> check_policy(const Policy& policy, const Shape& shape) {
    std::vector<std::string> problems;
    if (policy.horizon() != shape.size()) {
        problems.push_back("policy horizon differs from the MDP horizon");
        return problems;
    }
    for (std::size_t h = 0; h < shape.size(); ++h) {
        if (policy.num_states(h) != shape[h].size()) {
            problems.push_back("timestep " + std::to_string(h) + ": state count mismatch");
            continue;
        }
        for (std::size_t x = 0; x < shape[h].size(); ++x) {
            const auto row = policy.probs(h, x);
            if (row.size() != shape[h][x]) {
                problems.push_back("timestep " + std::to_string(h) + ": action count mismatch at state " + std::to_string(x));
                continue;
            }
            double s = 0.0;
            for (double p : row) {
                if (p < 0.0) problems.push_back("negative action probability");
                s += p;
            }
            if (!(std::abs(s - 1.0) <= 1e-12))
                problems.push_back("timestep " + std::to_string(h) + ": action probabilities at state " + std::to_string(x) +
                                   " do not sum to 1");
        }
    }
    return problems;
}

}  // namespace pabc
