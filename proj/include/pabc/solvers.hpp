#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pabc/data.hpp"
#include "pabc/dynamic_programming.hpp"
#include "pabc/function_class.hpp"
#include "pabc/mdp.hpp"

namespace pabc {

/// v_f[h][x] = f_h(x, pi_f(x)) under `rule`; the terminal layer is 0.
StateValues policy_values_of(const Table& f, const GreedyRule& rule, std::size_t terminal_states);

/// (1/n) sum_i w_h(x_i, a_i) (f_h(x_i, a_i) - r_i - f_{h+1}(x'_i, pi_f(x'_i))), with f_H = 0.
/// Direct per-tuple evaluation. Throws std::invalid_argument on an empty D_h.
double empirical_loss(const Table& f, const Table& w, std::size_t h, const Dataset& data,
                      const GreedyRule& rule = {});

/// E_{d^D_h}[w_h (f_h - R_h - E_{x'}[f_{h+1}(x', pi_f(x'))])]
double population_loss(const Table& f, const Table& w, std::size_t h, const LayeredMdp& mdp, const Table& data_dist,
                       const GreedyRule& rule = {});

/// Average Bellman error of f along pi's occupancy at timestep h.
double avg_bellman_error(const Table& f, const Policy& pi, std::size_t h, const LayeredMdp& mdp,
                         const GreedyRule& rule = {});

/// 2 C H sqrt(log(2 |F| |W| H / delta) / (2 n))
double eps_stat(double n, double C, std::size_t horizon, std::size_t size_F, std::size_t size_W, double delta);

/// Aggregated (x, a, x') masses that both loss flavours reduce to: empirical
/// frequencies of a dataset, or the exact products d^D_h(x, a) P_h(x'|x, a).
/// The MDP supplies only the layer shape and the initial state.
class LossSource {
public:
    static LossSource empirical(const LayeredMdp& mdp, const Dataset& data);
    static LossSource population(const LayeredMdp& mdp, const Table& data_dist);

    bool is_population() const { return population_; }
    std::size_t n() const { return n_; }
    std::size_t horizon() const { return entries_.size(); }
    std::size_t initial_state() const { return initial_state_; }
    const Shape& shape() const { return shape_; }
    std::size_t terminal_states() const { return terminal_states_; }

    /// L(f, w, h) given v_f from policy_values_of.
    double loss(const Table& f, const StateValues& v_f, const Table& w, std::size_t h) const;
    /// sum_h E[w_h R_h] under the source's (x, a) marginal.
    double weighted_return(const Table& w) const;

private:
    struct Entry {
        std::size_t x, a, next;
        double mass;
        double reward;
    };
    std::vector<std::vector<Entry>> entries_;
    Shape shape_;
    std::size_t terminal_states_ = 0;
    std::size_t initial_state_ = 0;
    std::size_t n_ = 0;
    bool population_ = false;
};

/// losses[f][w][h]
using LossMatrix = std::vector<std::vector<std::vector<double>>>;

LossMatrix loss_matrix(const FunctionClass& F, const WeightClass& W, const LossSource& source,
                       const GreedyRule& rule = {});

struct Feasibility {
    LossMatrix losses;
    std::vector<double> max_abs_loss;  ///< per f: max_{w,h} |L|
    std::vector<bool> feasible;
    std::vector<std::size_t> survivors;
};

/// |L| <= alpha with 1e-12 of slack; exact population losses of Q* come out
/// as ~1e-17 rather than 0.
bool within_alpha(double abs_loss, double alpha);

/// Members with max_{w,h} |L(f, w, h)| <= alpha.
Feasibility feasible_set(const FunctionClass& F, const WeightClass& W, const LossSource& source, double alpha,
                         const GreedyRule& rule = {});

/// How equal-objective members are resolved. Members whose objective is
/// within `tolerance` of the minimum are tied; `preferred` (an index into
/// the full class) wins when it is tied, otherwise the lowest index does.
struct MemberTieRule {
    std::optional<std::size_t> preferred;
    double tolerance = 1e-12;
};

struct PabcConfig {
    double alpha = 0.0;
    double c_gap = 0.0;
    GreedyRule greedy;
    MemberTieRule member_tie;
};

enum class Variant { pabc, pabc_l, population_pabc, population_pabc_l };
std::string to_string(Variant v);

struct Selection {
    Variant variant = Variant::pabc;
    std::size_t index = 0;  ///< position in the input class
    std::string name;
    Policy policy;
    double estimate = 0.0;
    double alpha = 0.0;  ///< unused by the Lagrangian variants
    double c_gap = 0.0;
    std::size_t n = 0;
    std::vector<std::string> member_names;
    std::vector<std::string> weight_names;
    std::vector<double> gaps;
    std::vector<bool> prescreened;     ///< survived prescreening
    std::vector<double> initial_values;  ///< f_0(x_0, pi_f(x_0))
    std::vector<double> max_abs_loss;
    std::vector<bool> feasible;        ///< constraint passed (all true for Lagrangian variants)
    std::vector<double> objective;     ///< NaN for members not considered
    LossMatrix losses;
};

/// Prescreen by gap, keep members satisfying the loss constraints, return the
/// pessimistic argmin of f_0(x_0, pi_f(x_0)). Throws EmptyVersionSpaceError.
Selection pabc(const FunctionClass& F, const WeightClass& W, const LossSource& source, const PabcConfig& config);

/// Prescreen by gap, then argmin of f_0(x_0, pi_f(x_0)) + H max_{w,h} |L|.
/// config.alpha is ignored. The estimate includes the penalty term.
Selection pabc_l(const FunctionClass& F, const WeightClass& W, const LossSource& source, const PabcConfig& config);

enum class Guarantee {
    value_identification,
    policy_gap,
    value_identification_robust,
    policy_gap_robust,
    policy_gap_linf,
    lagrangian_value,
    lagrangian_policy,
    lagrangian_value_robust,
    lagrangian_policy_robust,
    lagrangian_policy_linf,
};

std::string to_string(Guarantee g);
Guarantee guarantee_from_string(const std::string& s);
bool is_lagrangian(Guarantee g);
/// True when the guarantee is about v^pi rather than the return estimate.
bool is_policy_guarantee(Guarantee g);

struct HyperparameterInput {
    Guarantee mode = Guarantee::value_identification;
    double epsilon = 0.1;
    double delta = 0.1;
    std::size_t horizon = 1;
    double C = 1.0;
    std::size_t size_F = 1;
    std::size_t size_W = 1;
    double gap = 0.0;        ///< gap(Q*) for policy_gap / *_linf, the chosen C_gap for *_robust policy modes
    double eps_F = 0.0;      ///< eps_F or eps_F(C_gap) for the robust modes
    double eps_F_inf = 0.0;  ///< for the *_linf modes
};

struct Hyperparameters {
    std::optional<double> alpha;  ///< absent for the Lagrangian modes
    double c_gap = 0.0;
    double total_bound = 0.0;  ///< bound on n H
    std::size_t n_required = 0;  ///< ceil(total_bound / H)
};

Hyperparameters hyperparameters(const HyperparameterInput& in);

/// Extra tolerance the misspecified modes add to epsilon in their success
/// predicate, given the weight-class error eps_W; 0 for the realizable modes.
double robustness_slack(const HyperparameterInput& in, double eps_W);

/// log(2 |F| |W| H / delta)
double log_term(std::size_t size_F, std::size_t size_W, std::size_t horizon, double delta);

struct ConsistencyReport {
    std::vector<std::vector<bool>> consistent;  ///< [f][w]: w_h(x, a) = 0 whenever a != pi_f(x)
    std::vector<bool> f_has_consistent_w;
    std::vector<double> weighted_returns;  ///< sum_h E[w_h R_h]
    std::vector<bool> w_passes_return;
    std::vector<std::size_t> kept_f;
    std::vector<std::size_t> kept_w;

    bool changes_nothing(std::size_t size_F, std::size_t size_W) const {
        return kept_f.size() == size_F && kept_w.size() == size_W;
    }
};

/// Checks the two extra consistency constraints: some w is pi_f-consistent,
/// and each w reproduces the supplied return estimate within `tolerance`.
ConsistencyReport consistency_filters(const FunctionClass& F, const WeightClass& W, const LossSource& source,
                                      double v_star_estimate, double tolerance = 1e-9, const GreedyRule& rule = {});

}  // namespace pabc
