#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pabc/data.hpp"
#include "pabc/function_class.hpp"
#include "pabc/mdp.hpp"
#include "pabc/solvers.hpp"

namespace pabc {

struct Trajectory {
    std::vector<std::size_t> states;
    std::vector<std::size_t> actions;
    std::vector<double> rewards;

    double total_reward() const;
};

/// Online interaction with the environment: one episode per call.
class OnlineAccess {
public:
    virtual ~OnlineAccess() = default;
    virtual Trajectory rollout(const Policy& pi, std::uint64_t seed) = 0;
    virtual std::size_t horizon() const = 0;
};

/// Exact simulator of a known MDP; counts the episodes it served.
class Simulator : public OnlineAccess {
public:
    explicit Simulator(const LayeredMdp& mdp);
    Trajectory rollout(const Policy& pi, std::uint64_t seed) override;
    std::size_t horizon() const override { return mdp_.horizon; }
    std::size_t episodes() const { return episodes_; }

private:
    const LayeredMdp& mdp_;
    std::size_t episodes_ = 0;
};

/// Mean return of m rollouts; rollout i uses seed derive_seed(seed, i).
double monte_carlo_eval(OnlineAccess& access, const Policy& pi, std::size_t m, std::uint64_t seed);
double monte_carlo_eval(const LayeredMdp& mdp, const Policy& pi, std::size_t m, std::uint64_t seed);

/// ceil(2 H^3 log(12 * 2^t / delta) / eps_t^2): online samples (steps) for iteration t.
std::size_t mc_sample_count(double eps_t, std::size_t horizon, double delta, std::size_t t);
/// ceil(2 H^2 log(12 * 2^t / delta) / eps_t^2): episodes for iteration t.
std::size_t mc_rollout_count(double eps_t, std::size_t horizon, double delta, std::size_t t);

/// log(24 |F| |W| H 2^t / delta); t may be fractional.
double oa_iota(double t, std::size_t size_F, std::size_t size_W, std::size_t horizon, double delta);
/// sqrt(8 C^2 H^6 iota(t) / (n gap_guess^2))
double oa_epsilon(double n, double C, std::size_t horizon, double gap_guess, double iota);

enum class InitialGuess { horizon, max_class_gap };
std::string to_string(InitialGuess g);
InitialGuess initial_guess_from_string(const std::string& s);

struct OaConfig {
    double delta = 0.1;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 40;
    InitialGuess initial_guess = InitialGuess::horizon;
    GreedyRule greedy;
    MemberTieRule member_tie;
};

struct OaIteration {
    std::size_t t = 0;
    double gap_guess = 0.0;
    double iota = 0.0;
    double eps = 0.0;
    double alpha_value = 0.0;
    double alpha_policy = 0.0;
    std::optional<double> v_star_hat;
    std::optional<std::size_t> member;
    std::string member_name;
    Policy policy;
    std::size_t rollouts = 0;
    std::size_t samples = 0;
    std::optional<double> v_hat;
    bool stop = false;
    std::string note;  ///< why a sub-call produced no output, if it did not
};

struct OaTranscript {
    std::vector<OaIteration> iterations;
    bool stopped = false;
    bool cap_reached = false;
    std::optional<std::size_t> final_member;
    std::optional<Policy> final_policy;
    std::size_t total_online_samples = 0;
    double initial_gap_guess = 0.0;
    double C = 0.0;
    std::size_t n = 0;
};

/// Halving search over the unknown gap. Each iteration estimates v* with a
/// value-identification run, selects a policy with a gap-prescreened run,
/// evaluates it online, and stops once the evaluation is within 3 eps_t of
/// the estimate. A sub-call that leaves no candidate makes the stop test fail.
OaTranscript pabc_oa(const FunctionClass& F, const WeightClass& W, const LossSource& data, OnlineAccess& online,
                     const OaConfig& config);

/// Suboptimality bound 5 sqrt(32 C^2 H^6 iota(log2(2H/gap)) / (n gap^2)).
double oa_suboptimality_bound(double n, double C, std::size_t horizon, std::size_t size_F, std::size_t size_W,
                              double delta, double gap);
/// Online sample budget (log2(2H/gap))^2 n log(24/delta) / (C^2 H).
double oa_online_budget(double n, double C, std::size_t horizon, double delta, double gap);

}  // namespace pabc
