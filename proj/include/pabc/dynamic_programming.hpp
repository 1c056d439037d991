#pragma once

#include <limits>
#include <span>
#include <vector>

#include "pabc/mdp.hpp"

namespace pabc {

/// Per-state values indexed [h][x] for h in [0, H]; the terminal layer is 0.
using StateValues = std::vector<std::vector<double>>;

/// V_f(x_h) = max_a f_h(x_h, a), with V_f on the terminal layer equal to 0.
StateValues greedy_values(const LayeredMdp& mdp, const Table& f);

/// Applies the Bellman optimality operator at every timestep:
/// result_h = T_h f_{h+1} = R_h + E_{x' ~ P_h}[max_a f_{h+1}(x', a)], with f_H = 0.
Table bellman_backup(const LayeredMdp& mdp, const Table& f);

/// f - T f, entrywise.
Table bellman_residual(const LayeredMdp& mdp, const Table& f);

/// Q* by backward induction.
Table optimal_q(const LayeredMdp& mdp);

/// Greedy policy of f; the tie rule is recorded in the returned policy.
Policy greedy_policy(const Table& f, const GreedyRule& rule = {});

struct PolicyEvaluation {
    double value = 0.0;  ///< v^pi = V^pi_0(x_0)
    StateValues state_values;
    Table q_values;
};

/// Exact policy evaluation by backward induction.
PolicyEvaluation evaluate_policy(const LayeredMdp& mdp, const Policy& pi);
double policy_value(const LayeredMdp& mdp, const Policy& pi);

/// State-action occupancy d^pi_h by forward recursion from x_0.
Table occupancy(const LayeredMdp& mdp, const Policy& pi);

/// Per-state margin between the unique argmax and the runner-up. Zero when
/// two actions are within `tie_tolerance` of the maximum, +inf for
/// single-action states.
double state_gap(std::span<const double> row, double tie_tolerance = 1e-9);

/// Minimum per-state gap over all timesteps and states.
double gap_of_function(const Table& f, double tie_tolerance = 1e-9);

/// Minimum gap over members; throws std::invalid_argument on an empty list.
double gap_of_class(std::span<const Table> members, double tie_tolerance = 1e-9);

/// E[sum_h 1{pi_a(x_h) != pi_b(x_h)} | pi_b]. Both policies deterministic.
double policy_disagreement(const LayeredMdp& mdp, const Policy& pi_a, const Policy& pi_b);

/// max over (h, x, a) of |f_h - T_h f_{h+1}|.
double max_bellman_residual(const LayeredMdp& mdp, const Table& f);

}  // namespace pabc
