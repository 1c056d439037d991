#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pabc/function_class.hpp"
#include "pabc/mdp.hpp"
#include "pabc/solvers.hpp"

namespace pabc {

/// Facts about an instance, recomputed from scratch by the oracles.
struct Annotations {
    double v_star = 0.0;
    double gap_q_star = 0.0;
    double concentrability = 0.0;  ///< of pi* against d^D; +inf when w* does not exist
    bool w_star_exists = false;
    bool q_star_in_F = false;
    bool w_star_in_W = false;
    std::vector<double> member_gaps;
    std::vector<std::string> notes;
};

/// MDP, data distribution and classes bundled with their annotations.
/// `greedy` and `member_tie` hold the tie-breaking the instance is meant to be
/// run with (adversarial for the counterexample, defaults otherwise).
struct NamedInstance {
    std::string name;
    LayeredMdp mdp;
    Table data_dist;
    FunctionClass F;
    WeightClass W;
    GreedyRule greedy;
    MemberTieRule member_tie;
    Annotations annotations;
};

/// Recomputes v* (by policy enumeration), gap(Q*), concentrability, w*
/// existence, class membership and member gaps.
Annotations annotate(const NamedInstance& inst, double membership_tolerance = 1e-12);

/// Three-step chain where an off-data action ties with the optimal one.
/// F = {Q*, f}, W = {w*, w_bad}; the tie rules prefer f and its R1 action.
NamedInstance build_counterexample();

/// One-step, three-action instance whose optimal action is outside the data.
/// F = {Q*, f}, W = {w}.
NamedInstance build_table1_example();

enum class DataSupport { full, optimal_trajectory, mixture };
std::string to_string(DataSupport s);
DataSupport data_support_from_string(const std::string& s);

enum class DistractorKind { perturbed, shifted };

struct RandomOptions {
    std::size_t min_horizon = 1;
    std::size_t max_horizon = 3;
    std::size_t max_states = 4;   ///< per layer, at most 5
    std::size_t max_actions = 3;  ///< per state, at most 4
    std::size_t min_actions = 1;
    double sparsity = 0.3;        ///< chance that a transition entry is dropped
    bool deterministic_transitions = false;
    double gap_floor = 0.0;       ///< 0 disables the gap requirement; otherwise some state must offer a choice
    std::size_t resample_budget = 2000;
    std::size_t max_policy_count = 1'000'000;

    DataSupport support = DataSupport::full;
    double mixture_weight = 0.5;  ///< mass on d* for DataSupport::mixture

    bool include_q_star = true;
    DistractorKind distractor_kind = DistractorKind::perturbed;
    std::size_t f_distractors = 3;
    double perturbation = 0.1;
    std::vector<double> shifts;   ///< DistractorKind::shifted: f_0 = Q*_0 - c for each c

    bool include_w_star = true;
    std::size_t w_distractors = 3;
};

/// Random layered MDP with oracle-verified annotations. Layer 0 holds the
/// single initial state. With a gap floor, rewards are adjusted backward in
/// time toward the floor and the result is re-checked; instances that still
/// miss it are discarded. Throws std::runtime_error when the resampling
/// budget runs out.
NamedInstance random_instance(std::uint64_t seed, const RandomOptions& options = {});

/// Random valid MDP only (no classes), used by the oracle cross-checks.
LayeredMdp random_mdp(std::uint64_t seed, const RandomOptions& options = {});

/// Regular weight: nonnegative on the support of d^D with E_{d^D_h}[w_h] = 1.
Table random_regular_weight(const Table& data_dist, std::uint64_t seed);

}  // namespace pabc
