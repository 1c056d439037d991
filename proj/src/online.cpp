#include "pabc/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pabc/rng.hpp"

namespace pabc {

double Trajectory::total_reward() const {
    double s = 0.0;
    for (double r : rewards) s += r;
    return s;
}

Simulator::Simulator(const LayeredMdp& mdp) : mdp_(mdp) { require_valid(mdp_); }

Trajectory Simulator::rollout(const Policy& pi, std::uint64_t seed) {
    Rng rng(seed);
    Trajectory tr;
    std::size_t x = mdp_.initial_state;
    for (std::size_t h = 0; h < mdp_.horizon; ++h) {
        const std::size_t a = pi.is_deterministic() ? pi.action(h, x) : rng.categorical(pi.probs(h, x));
        tr.states.push_back(x);
        tr.actions.push_back(a);
        tr.rewards.push_back(mdp_.reward(h, x, a));
        x = rng.categorical(mdp_.next_state_probs(h, x, a));
    }
    tr.states.push_back(x);
    ++episodes_;
    return tr;
}

double monte_carlo_eval(OnlineAccess& access, const Policy& pi, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw std::invalid_argument("monte_carlo_eval: m must be positive");
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += access.rollout(pi, derive_seed(seed, i)).total_reward();
    return s / static_cast<double>(m);
}

double monte_carlo_eval(const LayeredMdp& mdp, const Policy& pi, std::size_t m, std::uint64_t seed) {
    Simulator sim(mdp);
    return monte_carlo_eval(sim, pi, m, seed);
}

namespace {

double mc_log(double delta, std::size_t t) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    return std::log(12.0 * std::ldexp(1.0, static_cast<int>(t)) / delta);
}

std::size_t checked_ceil(double v) {
    if (!std::isfinite(v) || v > 1e15) throw std::invalid_argument("Monte Carlo budget is not representable");
    return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace

std::size_t mc_sample_count(double eps_t, std::size_t horizon, double delta, std::size_t t) {
    if (!(eps_t > 0.0)) throw std::invalid_argument("eps_t must be positive");
    const double H = static_cast<double>(horizon);
    return checked_ceil(2.0 * H * H * H * mc_log(delta, t) / (eps_t * eps_t));
}

std::size_t mc_rollout_count(double eps_t, std::size_t horizon, double delta, std::size_t t) {
    if (!(eps_t > 0.0)) throw std::invalid_argument("eps_t must be positive");
    const double H = static_cast<double>(horizon);
    return std::max<std::size_t>(1, checked_ceil(2.0 * H * H * mc_log(delta, t) / (eps_t * eps_t)));
}

double oa_iota(double t, std::size_t size_F, std::size_t size_W, std::size_t horizon, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    return std::log(24.0 * static_cast<double>(size_F) * static_cast<double>(size_W) * static_cast<double>(horizon) *
                    std::exp2(t) / delta);
}

double oa_epsilon(double n, double C, std::size_t horizon, double gap_guess, double iota) {
    const double H = static_cast<double>(horizon);
    return std::sqrt(8.0 * C * C * std::pow(H, 6) * iota / (n * gap_guess * gap_guess));
}

std::string to_string(InitialGuess g) { return g == InitialGuess::horizon ? "horizon" : "max-class-gap"; }

InitialGuess initial_guess_from_string(const std::string& s) {
    if (s == "horizon") return InitialGuess::horizon;
    if (s == "max-class-gap") return InitialGuess::max_class_gap;
    throw std::invalid_argument("unknown initial guess '" + s + "'");
}

OaTranscript pabc_oa(const FunctionClass& F, const WeightClass& W, const LossSource& data, OnlineAccess& online,
                     const OaConfig& config) {
    if (data.is_population()) throw std::invalid_argument("pabc_oa needs an empirical dataset");
    if (online.horizon() != data.horizon()) throw std::invalid_argument("online access horizon differs from the data");
    if (config.max_iterations == 0) throw std::invalid_argument("iteration cap must be positive");

    const std::size_t H = data.horizon();
    const double Hd = static_cast<double>(H);
    OaTranscript tr;
    tr.C = W.bound_C();
    tr.n = data.n();
    if (!(tr.C > 0.0)) throw std::invalid_argument("weight class bound C must be positive");

    tr.initial_gap_guess = Hd;
    if (config.initial_guess == InitialGuess::max_class_gap) {
        double g = 0.0;
        for (std::size_t i = 0; i < F.size(); ++i)
            if (std::isfinite(F.gap(i))) g = std::max(g, F.gap(i));
        if (g > 0.0) tr.initial_gap_guess = std::min(g, Hd);
    }

    for (std::size_t t = 0; t < config.max_iterations; ++t) {
        OaIteration it;
        it.t = t;
        it.gap_guess = tr.initial_gap_guess / std::ldexp(1.0, static_cast<int>(t));
        it.iota = oa_iota(static_cast<double>(t), F.size(), W.size(), H, config.delta);
        it.eps = oa_epsilon(static_cast<double>(tr.n), tr.C, H, it.gap_guess, it.iota);
        it.alpha_value = it.eps / (2.0 * Hd);
        it.alpha_policy = it.eps * it.gap_guess / (2.0 * Hd * Hd);

        PabcConfig value_cfg{it.alpha_value, 0.0, config.greedy, config.member_tie};
        try {
            it.v_star_hat = pabc(F, W, data, value_cfg).estimate;
        } catch (const EmptyVersionSpaceError& e) {
            it.note = std::string("value step: ") + e.what();
        }

        PabcConfig policy_cfg{it.alpha_policy, it.gap_guess, config.greedy, config.member_tie};
        try {
            const Selection s = pabc(F, W, data, policy_cfg);
            it.member = s.index;
            it.member_name = s.name;
            it.policy = s.policy;
        } catch (const EmptyVersionSpaceError& e) {
            if (!it.note.empty()) it.note += "; ";
            it.note += std::string("policy step: ") + e.what();
        }

        if (it.member) {
            it.rollouts = mc_rollout_count(it.eps, H, config.delta, t);
            it.samples = it.rollouts * H;
            it.v_hat = monte_carlo_eval(online, it.policy, it.rollouts, derive_seed(config.seed, t));
            tr.total_online_samples += it.samples;
        }
        it.stop = it.v_star_hat && it.v_hat && *it.v_hat >= *it.v_star_hat - 3.0 * it.eps;
        tr.iterations.push_back(std::move(it));
        if (tr.iterations.back().stop) {
            tr.stopped = true;
            tr.final_member = tr.iterations.back().member;
            tr.final_policy = tr.iterations.back().policy;
            return tr;
        }
    }
    tr.cap_reached = true;
    return tr;
}

double oa_suboptimality_bound(double n, double C, std::size_t horizon, std::size_t size_F, std::size_t size_W,
                              double delta, double gap) {
    if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
    const double H = static_cast<double>(horizon);
    const double t = std::log2(2.0 * H / gap);
    const double iota = oa_iota(t, size_F, size_W, horizon, delta);
    return 5.0 * std::sqrt(32.0 * C * C * std::pow(H, 6) * iota / (n * gap * gap));
}

double oa_online_budget(double n, double C, std::size_t horizon, double delta, double gap) {
    if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
    const double H = static_cast<double>(horizon);
    const double l = std::log2(2.0 * H / gap);
    return l * l * n * std::log(24.0 / delta) / (C * C * H);
}

}  // namespace pabc
