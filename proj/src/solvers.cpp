#include "pabc/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace pabc {

StateValues policy_values_of(const Table& f, const GreedyRule& rule, std::size_t terminal_states) {
    const Policy pi = greedy_policy(f, rule);
    StateValues v(f.horizon() + 1);
    for (std::size_t h = 0; h < f.horizon(); ++h) {
        v[h].resize(f.num_states(h));
        for (std::size_t x = 0; x < f.num_states(h); ++x) v[h][x] = f(h, x, pi.action(h, x));
    }
    v[f.horizon()].assign(terminal_states, 0.0);
    return v;
}

double empirical_loss(const Table& f, const Table& w, std::size_t h, const Dataset& data, const GreedyRule& rule) {
    if (h >= data.timesteps.size() || data.timesteps[h].empty())
        throw std::invalid_argument("empirical_loss: empty dataset at timestep " + std::to_string(h));
    const bool last = h + 1 == f.horizon();
    const Policy pi = greedy_policy(f, rule);
    double s = 0.0;
    for (const auto& t : data.timesteps[h]) {
        const double next = last ? 0.0 : f(h + 1, t.next_state, pi.action(h + 1, t.next_state));
        s += w(h, t.state, t.action) * (f(h, t.state, t.action) - t.reward - next);
    }
    return s / static_cast<double>(data.timesteps[h].size());
}

double population_loss(const Table& f, const Table& w, std::size_t h, const LayeredMdp& mdp, const Table& data_dist,
                       const GreedyRule& rule) {
    const StateValues v = policy_values_of(f, rule, mdp.num_states(mdp.horizon));
    double s = 0.0;
    for (std::size_t x = 0; x < mdp.num_states(h); ++x)
        for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
            const double d = data_dist(h, x, a);
            if (d == 0.0) continue;
            const auto p = mdp.next_state_probs(h, x, a);
            double next = 0.0;
            for (std::size_t y = 0; y < p.size(); ++y) next += p[y] * v[h + 1][y];
            s += d * w(h, x, a) * (f(h, x, a) - mdp.reward(h, x, a) - next);
        }
    return s;
}

double avg_bellman_error(const Table& f, const Policy& pi, std::size_t h, const LayeredMdp& mdp,
                         const GreedyRule& rule) {
    const Table d = occupancy(mdp, pi);
    const StateValues v = policy_values_of(f, rule, mdp.num_states(mdp.horizon));
    double s = 0.0;
    for (std::size_t x = 0; x < mdp.num_states(h); ++x)
        for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
            if (d(h, x, a) == 0.0) continue;
            const auto p = mdp.next_state_probs(h, x, a);
            double next = 0.0;
            for (std::size_t y = 0; y < p.size(); ++y) next += p[y] * v[h + 1][y];
            s += d(h, x, a) * (f(h, x, a) - mdp.reward(h, x, a) - next);
        }
    return s;
}

double log_term(std::size_t size_F, std::size_t size_W, std::size_t horizon, double delta) {
    if (size_F == 0 || size_W == 0 || horizon == 0) throw std::invalid_argument("class sizes and H must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    return std::log(2.0 * static_cast<double>(size_F) * static_cast<double>(size_W) * static_cast<double>(horizon) /
                    delta);
}

double eps_stat(double n, double C, std::size_t horizon, std::size_t size_F, std::size_t size_W, double delta) {
    if (!(n > 0.0)) throw std::invalid_argument("eps_stat: n must be positive");
    if (!(C > 0.0)) throw std::invalid_argument("eps_stat: C must be positive");
    const double L = log_term(size_F, size_W, horizon, delta);
    return 2.0 * C * static_cast<double>(horizon) * std::sqrt(L / (2.0 * n));
}

LossSource LossSource::empirical(const LayeredMdp& mdp, const Dataset& data) {
    if (data.timesteps.size() != mdp.horizon) throw std::invalid_argument("dataset horizon differs from the MDP");
    LossSource s;
    s.shape_ = mdp.shape();
    s.terminal_states_ = mdp.num_states(mdp.horizon);
    s.initial_state_ = mdp.initial_state;
    s.n_ = data.n;
    s.entries_.resize(mdp.horizon);
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
        const auto& tuples = data.timesteps[h];
        if (tuples.empty()) throw std::invalid_argument("empty dataset at timestep " + std::to_string(h));
        std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<double, double>> agg;
        for (const auto& t : tuples) {
            auto& [count, reward_sum] = agg[{t.state, t.action, t.next_state}];
            count += 1.0;
            reward_sum += t.reward;
        }
        const double n = static_cast<double>(tuples.size());
        for (const auto& [key, val] : agg) {
            const auto [x, a, y] = key;
            s.entries_[h].push_back({x, a, y, val.first / n, val.second / val.first});
        }
    }
    return s;
}

LossSource LossSource::population(const LayeredMdp& mdp, const Table& data_dist) {
    const auto problems = check_data_distribution(mdp, data_dist);
    if (!problems.empty()) throw std::invalid_argument("invalid data distribution: " + problems.front());
    LossSource s;
    s.shape_ = mdp.shape();
    s.terminal_states_ = mdp.num_states(mdp.horizon);
    s.initial_state_ = mdp.initial_state;
    s.population_ = true;
    s.entries_.resize(mdp.horizon);
    for (std::size_t h = 0; h < mdp.horizon; ++h)
        for (std::size_t x = 0; x < mdp.num_states(h); ++x)
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
                const double d = data_dist(h, x, a);
                if (d == 0.0) continue;
                const auto p = mdp.next_state_probs(h, x, a);
                for (std::size_t y = 0; y < p.size(); ++y)
                    if (p[y] > 0.0) s.entries_[h].push_back({x, a, y, d * p[y], mdp.reward(h, x, a)});
            }
    return s;
}

double LossSource::loss(const Table& f, const StateValues& v_f, const Table& w, std::size_t h) const {
    double s = 0.0;
    for (const auto& e : entries_.at(h)) {
        const double wv = w(h, e.x, e.a);
        if (wv == 0.0) continue;
        s += e.mass * wv * (f(h, e.x, e.a) - e.reward - v_f[h + 1][e.next]);
    }
    return s;
}

double LossSource::weighted_return(const Table& w) const {
    double s = 0.0;
    for (std::size_t h = 0; h < entries_.size(); ++h)
        for (const auto& e : entries_[h]) s += e.mass * w(h, e.x, e.a) * e.reward;
    return s;
}

LossMatrix loss_matrix(const FunctionClass& F, const WeightClass& W, const LossSource& source,
                       const GreedyRule& rule) {
    if (F.shape() != source.shape() || W.shape() != source.shape())
        throw std::invalid_argument("class shape differs from the data source shape");
    LossMatrix m(F.size(), std::vector<std::vector<double>>(W.size(), std::vector<double>(source.horizon())));
    for (std::size_t i = 0; i < F.size(); ++i) {
        const StateValues v = policy_values_of(F[i], rule, source.terminal_states());
        for (std::size_t j = 0; j < W.size(); ++j)
            for (std::size_t h = 0; h < source.horizon(); ++h) m[i][j][h] = source.loss(F[i], v, W[j], h);
    }
    return m;
}

namespace {

double max_abs(const std::vector<std::vector<double>>& rows) {
    double m = 0.0;
    for (const auto& r : rows)
        for (double v : r) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

bool within_alpha(double abs_loss, double alpha) { return abs_loss <= alpha + 1e-12; }

Feasibility feasible_set(const FunctionClass& F, const WeightClass& W, const LossSource& source, double alpha,
                         const GreedyRule& rule) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
    Feasibility out;
    out.losses = loss_matrix(F, W, source, rule);
    for (std::size_t i = 0; i < F.size(); ++i) {
        out.max_abs_loss.push_back(max_abs(out.losses[i]));
        out.feasible.push_back(within_alpha(out.max_abs_loss.back(), alpha));
        if (out.feasible.back()) out.survivors.push_back(i);
    }
    return out;
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::pabc: return "pabc";
        case Variant::pabc_l: return "pabc-l";
        case Variant::population_pabc: return "population-pabc";
        case Variant::population_pabc_l: return "population-pabc-l";
    }
    return "?";
}

namespace {

double initial_value(const Table& f, std::size_t x0, const GreedyRule& rule) {
    const Policy pi = greedy_policy(f, rule);
    return f(0, x0, pi.action(0, x0));
}

std::size_t pick_member(const std::vector<double>& objective, const MemberTieRule& tie) {
    double best = std::numeric_limits<double>::infinity();
    for (double o : objective)
        if (!std::isnan(o)) best = std::min(best, o);
    const double cutoff = best + tie.tolerance;
    if (tie.preferred && *tie.preferred < objective.size()) {
        const double o = objective[*tie.preferred];
        if (!std::isnan(o) && o <= cutoff) return *tie.preferred;
    }
    for (std::size_t i = 0; i < objective.size(); ++i)
        if (!std::isnan(objective[i]) && objective[i] <= cutoff) return i;
    throw std::logic_error("pick_member: no candidate");
}

Selection prepare(const FunctionClass& F, const WeightClass& W, const LossSource& source, const PabcConfig& config,
                  Variant variant) {
    if (!(config.c_gap >= 0.0)) throw std::invalid_argument("C_gap must be nonnegative");
    Selection s;
    s.variant = variant;
    s.c_gap = config.c_gap;
    s.alpha = config.alpha;
    s.n = source.n();
    for (std::size_t i = 0; i < F.size(); ++i) {
        s.member_names.push_back(F.name(i));
        s.gaps.push_back(F.gap(i));
        s.initial_values.push_back(initial_value(F[i], source.initial_state(), config.greedy));
    }
    for (std::size_t j = 0; j < W.size(); ++j) s.weight_names.push_back(W.name(j));
    const Prescreened pre = prescreen(F, config.c_gap);
    s.prescreened.assign(F.size(), false);
    for (auto i : pre.indices) s.prescreened[i] = true;
    s.losses = loss_matrix(F, W, source, config.greedy);
    for (std::size_t i = 0; i < F.size(); ++i) s.max_abs_loss.push_back(max_abs(s.losses[i]));
    s.objective.assign(F.size(), std::numeric_limits<double>::quiet_NaN());
    return s;
}

void finish(Selection& s, const FunctionClass& F, const PabcConfig& config) {
    s.index = pick_member(s.objective, config.member_tie);
    s.name = F.name(s.index);
    s.policy = greedy_policy(F[s.index], config.greedy);
    s.estimate = s.objective[s.index];
}

}  // namespace

Selection pabc(const FunctionClass& F, const WeightClass& W, const LossSource& source, const PabcConfig& config) {
    if (!(config.alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
    Selection s = prepare(F, W, source, config, source.is_population() ? Variant::population_pabc : Variant::pabc);
    bool any = false;
    for (std::size_t i = 0; i < F.size(); ++i) {
        s.feasible.push_back(within_alpha(s.max_abs_loss[i], config.alpha));
        if (s.prescreened[i] && s.feasible[i]) {
            s.objective[i] = s.initial_values[i];
            any = true;
        }
    }
    if (!any) {
        std::size_t tight = F.size();
        for (std::size_t i = 0; i < F.size(); ++i)
            if (s.prescreened[i] && (tight == F.size() || s.max_abs_loss[i] < s.max_abs_loss[tight])) tight = i;
        std::size_t tw = 0, th = 0;
        double worst = -1.0;
        for (std::size_t j = 0; j < W.size(); ++j)
            for (std::size_t h = 0; h < source.horizon(); ++h)
                if (std::abs(s.losses[tight][j][h]) > worst) {
                    worst = std::abs(s.losses[tight][j][h]);
                    tw = j;
                    th = h;
                }
        std::ostringstream os;
        os << "no prescreened member satisfies max |L| <= " << config.alpha << "; tightest violation: member '"
           << F.name(tight) << "' with |L| = " << worst << " at weight '" << W.name(tw) << "', h = " << th;
        throw EmptyVersionSpaceError(EmptyVersionSpaceError::Stage::feasibility, os.str());
    }
    finish(s, F, config);
    return s;
}

Selection pabc_l(const FunctionClass& F, const WeightClass& W, const LossSource& source, const PabcConfig& config) {
    Selection s =
        prepare(F, W, source, config, source.is_population() ? Variant::population_pabc_l : Variant::pabc_l);
    const double H = static_cast<double>(source.horizon());
    s.feasible.assign(F.size(), true);
    for (std::size_t i = 0; i < F.size(); ++i)
        if (s.prescreened[i]) s.objective[i] = s.initial_values[i] + H * s.max_abs_loss[i];
    finish(s, F, config);
    return s;
}

std::string to_string(Guarantee g) {
    switch (g) {
        case Guarantee::value_identification: return "value-identification";
        case Guarantee::policy_gap: return "policy-gap";
        case Guarantee::value_identification_robust: return "value-identification-robust";
        case Guarantee::policy_gap_robust: return "policy-gap-robust";
        case Guarantee::policy_gap_linf: return "policy-gap-linf";
        case Guarantee::lagrangian_value: return "lagrangian-value";
        case Guarantee::lagrangian_policy: return "lagrangian-policy";
        case Guarantee::lagrangian_value_robust: return "lagrangian-value-robust";
        case Guarantee::lagrangian_policy_robust: return "lagrangian-policy-robust";
        case Guarantee::lagrangian_policy_linf: return "lagrangian-policy-linf";
    }
    return "?";
}

Guarantee guarantee_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Guarantee::lagrangian_policy_linf); ++i)
        if (to_string(static_cast<Guarantee>(i)) == s) return static_cast<Guarantee>(i);
    throw std::invalid_argument("unknown guarantee mode '" + s + "'");
}

bool is_lagrangian(Guarantee g) { return g >= Guarantee::lagrangian_value; }

bool is_policy_guarantee(Guarantee g) {
    switch (g) {
        case Guarantee::value_identification:
        case Guarantee::value_identification_robust:
        case Guarantee::lagrangian_value:
        case Guarantee::lagrangian_value_robust: return false;
        default: return true;
    }
}

Hyperparameters hyperparameters(const HyperparameterInput& in) {
    if (!(in.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(in.C > 0.0)) throw std::invalid_argument("C must be positive");
    if (in.eps_F < 0.0 || in.eps_F_inf < 0.0) throw std::invalid_argument("misspecification errors must be >= 0");
    const double L = log_term(in.size_F, in.size_W, in.horizon, in.delta);
    const double H = static_cast<double>(in.horizon);
    const double C2 = in.C * in.C;
    const double e = in.epsilon;
    const double e2 = e * e;

    auto need_gap = [&](double g, const char* what) {
        if (!(g > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive for this mode");
        return g;
    };
    auto linf_gap = [&] {
        const double g = need_gap(in.gap, "gap(Q*)");
        if (2.0 * in.eps_F_inf >= g) throw std::invalid_argument("2 eps_F_inf must be smaller than gap(Q*)");
        return g - 2.0 * in.eps_F_inf;
    };

    Hyperparameters out;
    switch (in.mode) {
        case Guarantee::value_identification:
            out.alpha = e / (2.0 * H);
            out.total_bound = 8.0 * C2 * std::pow(H, 5) * L / e2;
            break;
        case Guarantee::policy_gap: {
            const double g = need_gap(in.gap, "gap(Q*)");
            out.c_gap = g;
            out.alpha = e * g / (2.0 * H * H);
            out.total_bound = 8.0 * C2 * std::pow(H, 7) * L / (e2 * g * g);
            break;
        }
        case Guarantee::value_identification_robust:
            out.alpha = e / (2.0 * H) + in.eps_F;
            out.total_bound = 8.0 * C2 * std::pow(H, 5) * L / e2;
            break;
        case Guarantee::policy_gap_robust: {
            const double g = need_gap(in.gap, "C_gap");
            out.c_gap = g;
            out.alpha = e * g / (2.0 * H * H) + in.eps_F;
            out.total_bound = 8.0 * C2 * std::pow(H, 7) * L / (e2 * g * g);
            break;
        }
        case Guarantee::policy_gap_linf: {
            const double g = linf_gap();
            out.c_gap = g;
            out.alpha = e * g / (2.0 * H * H) + 2.0 * in.eps_F_inf;
            out.total_bound = 8.0 * C2 * std::pow(H, 7) * L / (e2 * g * g);
            break;
        }
        case Guarantee::lagrangian_value:
        case Guarantee::lagrangian_value_robust:
            out.total_bound = 8.0 * C2 * std::pow(H, 5) * L / e2;
            break;
        case Guarantee::lagrangian_policy: {
            const double g = need_gap(in.gap, "gap(Q*)");
            out.c_gap = g;
            out.total_bound = 32.0 * C2 * std::pow(H, 7) * L / (e2 * g * g);
            break;
        }
        case Guarantee::lagrangian_policy_robust: {
            const double g = need_gap(in.gap, "C_gap");
            out.c_gap = g;
            out.total_bound = 32.0 * C2 * std::pow(H, 7) * L / (e2 * g * g);
            break;
        }
        case Guarantee::lagrangian_policy_linf: {
            const double g = linf_gap();
            out.c_gap = g;
            out.total_bound = 8.0 * C2 * std::pow(H, 7) * L / (e2 * g * g);
            break;
        }
    }
    out.n_required = static_cast<std::size_t>(std::ceil(out.total_bound / H));
    return out;
}

double robustness_slack(const HyperparameterInput& in, double eps_W) {
    const double H = static_cast<double>(in.horizon);
    const double H2 = H * H;
    switch (in.mode) {
        case Guarantee::value_identification_robust:
        case Guarantee::lagrangian_value_robust: return H * in.eps_F + H * eps_W;
        case Guarantee::policy_gap_robust: return ((H2 + H) * in.eps_F + H2 * eps_W) / in.gap;
        case Guarantee::lagrangian_policy_robust: return (H2 * in.eps_F + H2 * eps_W) / in.gap;
        case Guarantee::policy_gap_linf:
            return ((2.0 * H2 + H) * in.eps_F_inf + H2 * eps_W) / (in.gap - 2.0 * in.eps_F_inf);
        case Guarantee::lagrangian_policy_linf:
            return (2.0 * H2 * in.eps_F_inf + H2 * eps_W) / (in.gap - 2.0 * in.eps_F_inf);
        default: return 0.0;
    }
}

ConsistencyReport consistency_filters(const FunctionClass& F, const WeightClass& W, const LossSource& source,
                                      double v_star_estimate, double tolerance, const GreedyRule& rule) {
    ConsistencyReport rep;
    rep.consistent.assign(F.size(), std::vector<bool>(W.size(), true));
    for (std::size_t i = 0; i < F.size(); ++i) {
        const Policy pi = greedy_policy(F[i], rule);
        for (std::size_t j = 0; j < W.size(); ++j) {
            bool ok = true;
            for (std::size_t h = 0; h < W[j].horizon() && ok; ++h)
                for (std::size_t x = 0; x < W[j].num_states(h) && ok; ++x)
                    for (std::size_t a = 0; a < W[j].num_actions(h, x); ++a)
                        if (a != pi.action(h, x) && W[j](h, x, a) != 0.0) {
                            ok = false;
                            break;
                        }
            rep.consistent[i][j] = ok;
        }
        const bool any = std::find(rep.consistent[i].begin(), rep.consistent[i].end(), true) != rep.consistent[i].end();
        rep.f_has_consistent_w.push_back(any);
        if (any) rep.kept_f.push_back(i);
    }
    for (std::size_t j = 0; j < W.size(); ++j) {
        rep.weighted_returns.push_back(source.weighted_return(W[j]));
        rep.w_passes_return.push_back(std::abs(rep.weighted_returns.back() - v_star_estimate) <= tolerance);
        if (rep.w_passes_return.back()) rep.kept_w.push_back(j);
    }
    return rep;
}

}  // namespace pabc
