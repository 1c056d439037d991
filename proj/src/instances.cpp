#include "pabc/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pabc/data.hpp"
#include "pabc/dynamic_programming.hpp"
#include "pabc/oracles.hpp"
#include "pabc/rng.hpp"

namespace pabc {

Annotations annotate(const NamedInstance& inst, double membership_tolerance) {
    Annotations a;
    const LayeredMdp& mdp = inst.mdp;
    const Table q = optimal_q(mdp);
    try {
        a.v_star = oracle::brute_force_optimal(mdp).value;
    } catch (const std::length_error&) {
        const auto row = q.row(0, mdp.initial_state);
        a.v_star = *std::max_element(row.begin(), row.end());
        a.notes.push_back("v* from backward induction: too many policies to enumerate");
    }
    a.gap_q_star = gap_of_function(q, inst.F.tie_tolerance());
    const Policy pi_star = greedy_policy(q);
    const DensityRatio ratio = density_ratio(mdp, pi_star, inst.data_dist);
    a.w_star_exists = ratio.exists();
    a.concentrability = ratio.exists() ? ratio.weights->max_abs() : std::numeric_limits<double>::infinity();
    a.q_star_in_F = inst.F.find(q, membership_tolerance) < inst.F.size();
    a.w_star_in_W = ratio.exists() && inst.W.find(*ratio.weights, membership_tolerance) < inst.W.size();
    for (std::size_t i = 0; i < inst.F.size(); ++i) a.member_gaps.push_back(inst.F.gap(i));
    return a;
}

namespace {

void expect_close(double got, double want, const char* what) {
    if (!(std::abs(got - want) <= 1e-12) && !(std::isinf(got) && std::isinf(want)))
        throw std::logic_error(std::string("instance construction: ") + what + " differs from the design value");
}

Table table_from(const Shape& shape, TableRole role, const std::vector<std::vector<std::vector<double>>>& v) {
    Table t(shape, role);
    for (std::size_t h = 0; h < v.size(); ++h)
        for (std::size_t x = 0; x < v[h].size(); ++x)
            for (std::size_t a = 0; a < v[h][x].size(); ++a) t(h, x, a) = v[h][x][a];
    return t;
}

}  // namespace

NamedInstance build_counterexample() {
    LayeredMdp m;
    m.horizon = 3;
    m.layers = {{"x0"}, {"xA", "xB"}, {"xC", "xB'"}, {"end"}};
    m.actions = {{{"L1", "R1"}}, {{"L2"}, {"null"}}, {{"null"}, {"null"}}};
    m.transitions = {
        {{{1.0, 0.0}, {0.0, 1.0}}},
        {{{1.0, 0.0}}, {{0.0, 1.0}}},
        {{{1.0}}, {{1.0}}},
    };
    m.rewards = {{{0.0, 0.0}}, {{0.0}, {0.0}}, {{1.0}, {0.0}}};
    m.initial_state = 0;
    require_valid(m);
    const Shape s = m.shape();

    NamedInstance inst;
    inst.name = "counterexample";
    inst.mdp = m;
    inst.data_dist = table_from(s, TableRole::data_distribution, {{{1, 0}}, {{1}, {0}}, {{1}, {0}}});

    const Table q = table_from(s, TableRole::value, {{{1, 0}}, {{1}, {0}}, {{1}, {0}}});
    const Table f = table_from(s, TableRole::value, {{{1, 1}}, {{1}, {1}}, {{1}, {0}}});
    inst.F = FunctionClass({{"Q*", q}, {"f", f}});

    const Table w_star = table_from(s, TableRole::weight, {{{1, 0}}, {{1}, {0}}, {{1}, {0}}});
    const Table w_bad = table_from(s, TableRole::weight, {{{0, 1}}, {{1}, {0}}, {{1}, {0}}});
    inst.W = WeightClass({{"w*", w_star}, {"w_bad", w_bad}});

    inst.greedy.rule = TieRule::explicit_choice;
    inst.greedy.preferred[{0, 0}] = 1;  // R1 at x0
    inst.member_tie.preferred = 1;      // f

    inst.annotations = annotate(inst);
    expect_close(inst.annotations.v_star, 1.0, "v*");
    expect_close(inst.annotations.gap_q_star, 1.0, "gap(Q*)");
    expect_close(inst.annotations.member_gaps.at(1), 0.0, "gap(f)");
    if (!inst.annotations.q_star_in_F || !inst.annotations.w_star_in_W)
        throw std::logic_error("instance construction: Q* or w* missing from its class");
    const Policy pi_f = greedy_policy(f, inst.greedy);
    expect_close(policy_value(m, pi_f), 0.0, "v of the adversarial greedy policy of f");
    inst.annotations.notes.push_back("adversarial greedy policy of f has value 0");
    return inst;
}

NamedInstance build_table1_example() {
    LayeredMdp m;
    m.horizon = 1;
    m.layers = {{"x0"}, {"Null"}};
    m.actions = {{{"L", "M", "R"}}};
    m.transitions = {{{{1.0}, {1.0}, {1.0}}}};
    m.rewards = {{{0.8, 0.6, 0.3}}};
    m.initial_state = 0;
    require_valid(m);
    const Shape s = m.shape();

    NamedInstance inst;
    inst.name = "table1";
    inst.mdp = m;
    inst.data_dist = table_from(s, TableRole::data_distribution, {{{0.0, 0.5, 0.5}}});
    inst.F = FunctionClass({{"Q*", table_from(s, TableRole::value, {{{0.8, 0.6, 0.3}}})},
                            {"f", table_from(s, TableRole::value, {{{0.7, 0.3, 0.8}}})}});
    inst.W = WeightClass({{"w", table_from(s, TableRole::weight, {{{0.0, 1.0, 1.0}}})}});

    inst.annotations = annotate(inst);
    expect_close(inst.annotations.v_star, 0.8, "v*");
    expect_close(inst.annotations.concentrability, std::numeric_limits<double>::infinity(), "concentrability");
    if (inst.annotations.w_star_exists) throw std::logic_error("instance construction: w* should not exist");
    inst.annotations.notes.push_back("w* does not exist: d*(x0, L) = 1 while d^D(x0, L) = 0");
    return inst;
}

std::string to_string(DataSupport s) {
    switch (s) {
        case DataSupport::full: return "full";
        case DataSupport::optimal_trajectory: return "optimal-trajectory";
        case DataSupport::mixture: return "mixture";
    }
    return "?";
}

DataSupport data_support_from_string(const std::string& s) {
    if (s == "full") return DataSupport::full;
    if (s == "optimal-trajectory") return DataSupport::optimal_trajectory;
    if (s == "mixture") return DataSupport::mixture;
    throw std::invalid_argument("unknown data support '" + s + "'");
}

namespace {

void check_limits(const RandomOptions& o) {
    if (o.min_horizon == 0 || o.min_horizon > o.max_horizon || o.max_horizon > 4)
        throw std::invalid_argument("random_instance: horizon must satisfy 1 <= min <= max <= 4");
    if (o.max_states == 0 || o.max_states > 5) throw std::invalid_argument("random_instance: 1..5 states per layer");
    if (o.min_actions == 0 || o.min_actions > o.max_actions || o.max_actions > 4)
        throw std::invalid_argument("random_instance: 1 <= min actions <= max actions <= 4");
}

LayeredMdp draw_mdp(Rng& rng, const RandomOptions& o) {
    LayeredMdp m;
    m.horizon = o.min_horizon + rng.index(o.max_horizon - o.min_horizon + 1);
    m.layers.resize(m.horizon + 1);
    for (std::size_t h = 0; h <= m.horizon; ++h) {
        const std::size_t n = h == 0 ? 1 : 1 + rng.index(o.max_states);
        for (std::size_t x = 0; x < n; ++x) m.layers[h].push_back("s" + std::to_string(h) + "_" + std::to_string(x));
    }
    m.actions.resize(m.horizon);
    m.transitions.resize(m.horizon);
    m.rewards.resize(m.horizon);
    for (std::size_t h = 0; h < m.horizon; ++h) {
        const std::size_t next = m.layers[h + 1].size();
        for (std::size_t x = 0; x < m.layers[h].size(); ++x) {
            const std::size_t na = o.min_actions + rng.index(o.max_actions - o.min_actions + 1);
            std::vector<std::string> names;
            std::vector<std::vector<double>> rows;
            std::vector<double> rewards;
            for (std::size_t a = 0; a < na; ++a) {
                names.push_back("a" + std::to_string(a));
                std::vector<double> row(next, 0.0);
                if (o.deterministic_transitions) {
                    row[rng.index(next)] = 1.0;
                } else {
                    double total = 0.0;
                    for (auto& p : row) {
                        const double u = rng.uniform(0.05, 1.0);
                        if (rng.uniform() >= o.sparsity) p = u;
                        total += p;
                    }
                    if (total == 0.0) {
                        row[rng.index(next)] = 1.0;
                    } else {
                        for (auto& p : row) p /= total;
                    }
                }
                rows.push_back(std::move(row));
                rewards.push_back(rng.uniform());
            }
            m.actions[h].push_back(std::move(names));
            m.transitions[h].push_back(std::move(rows));
            m.rewards[h].push_back(std::move(rewards));
        }
    }
    m.initial_state = 0;
    return m;
}

/// Backward pass that lowers non-greedy rewards (or raises the greedy one)
/// until every multi-action state leads by `target`.
void shape_gap(LayeredMdp& m, double target) {
    std::vector<double> vnext(m.layers[m.horizon].size(), 0.0);
    for (std::size_t h = m.horizon; h-- > 0;) {
        std::vector<double> v(m.layers[h].size());
        for (std::size_t x = 0; x < m.layers[h].size(); ++x) {
            const std::size_t na = m.actions[h][x].size();
            std::vector<double> cont(na, 0.0);
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t y = 0; y < vnext.size(); ++y) cont[a] += m.transitions[h][x][a][y] * vnext[y];
            auto q = [&](std::size_t a) { return m.rewards[h][x][a] + cont[a]; };
            std::size_t best = 0;
            for (std::size_t a = 1; a < na; ++a)
                if (q(a) > q(best)) best = a;
            for (std::size_t a = 0; a < na; ++a) {
                if (a == best) continue;
                double deficit = target - (q(best) - q(a));
                if (deficit <= 0.0) continue;
                const double down = std::min(deficit, m.rewards[h][x][a]);
                m.rewards[h][x][a] -= down;
                deficit -= down;
                if (deficit > 0.0) m.rewards[h][x][best] = std::min(1.0, m.rewards[h][x][best] + deficit);
            }
            v[x] = q(best);
            for (std::size_t a = 0; a < na; ++a) v[x] = std::max(v[x], q(a));
        }
        vnext = std::move(v);
    }
}

Table clip_to_range(Table f) {
    const double H = static_cast<double>(f.horizon());
    for (std::size_t h = 0; h < f.horizon(); ++h)
        for (std::size_t x = 0; x < f.num_states(h); ++x)
            for (auto& v : f.row(h, x)) v = std::clamp(v, 0.0, H - static_cast<double>(h));
    return f;
}

Table full_support_dist(const Shape& shape, Rng& rng) {
    Table d(shape, TableRole::data_distribution);
    for (std::size_t h = 0; h < shape.size(); ++h) {
        double total = 0.0;
        for (std::size_t x = 0; x < shape[h].size(); ++x)
            for (auto& v : d.row(h, x)) {
                v = rng.uniform(0.2, 1.0);
                total += v;
            }
        for (std::size_t x = 0; x < shape[h].size(); ++x)
            for (auto& v : d.row(h, x)) v /= total;
    }
    return d;
}

}  // namespace

LayeredMdp random_mdp(std::uint64_t seed, const RandomOptions& options) {
    check_limits(options);
    for (std::size_t k = 0; k < options.resample_budget; ++k) {
        Rng rng(derive_seed(seed, k));
        LayeredMdp m = draw_mdp(rng, options);
        if (oracle::policy_count(m) > options.max_policy_count) continue;
        if (options.gap_floor > 0.0) {
            shape_gap(m, options.gap_floor * 1.05);
            const double g = gap_of_function(optimal_q(m));
            if (!std::isfinite(g) || g < options.gap_floor) continue;
        }
        require_valid(m);
        return m;
    }
    throw std::runtime_error("random_instance: resampling budget exhausted");
}

Table random_regular_weight(const Table& data_dist, std::uint64_t seed) {
    Rng rng(seed);
    Table w(data_dist.shape(), TableRole::weight);
    for (std::size_t h = 0; h < w.horizon(); ++h) {
        double mass = 0.0;
        for (std::size_t x = 0; x < w.num_states(h); ++x)
            for (std::size_t a = 0; a < w.num_actions(h, x); ++a) {
                if (data_dist(h, x, a) == 0.0) continue;
                w(h, x, a) = rng.uniform(0.1, 1.0);
                mass += data_dist(h, x, a) * w(h, x, a);
            }
        for (std::size_t x = 0; x < w.num_states(h); ++x)
            for (auto& v : w.row(h, x)) v /= mass;
    }
    return w;
}

NamedInstance random_instance(std::uint64_t seed, const RandomOptions& o) {
    NamedInstance inst;
    inst.name = "random-" + std::to_string(seed);
    inst.mdp = random_mdp(seed, o);
    Rng rng(derive_seed(seed, 0x5eedULL));

    const Shape shape = inst.mdp.shape();
    const Table q = optimal_q(inst.mdp);
    const Table d_star = occupancy(inst.mdp, greedy_policy(q));
    switch (o.support) {
        case DataSupport::full: inst.data_dist = full_support_dist(shape, rng); break;
        case DataSupport::optimal_trajectory:
            inst.data_dist = d_star;
            inst.data_dist.set_role(TableRole::data_distribution);
            break;
        case DataSupport::mixture: {
            const Table full = full_support_dist(shape, rng);
            inst.data_dist = Table(shape, TableRole::data_distribution);
            for (std::size_t h = 0; h < shape.size(); ++h)
                for (std::size_t x = 0; x < shape[h].size(); ++x)
                    for (std::size_t a = 0; a < shape[h][x]; ++a)
                        inst.data_dist(h, x, a) = o.mixture_weight * d_star(h, x, a) + (1.0 - o.mixture_weight) * full(h, x, a);
            break;
        }
    }

    std::vector<NamedTable> fs;
    if (o.include_q_star) fs.push_back({"Q*", q});
    if (o.distractor_kind == DistractorKind::perturbed) {
        for (std::size_t k = 0; k < o.f_distractors; ++k) {
            Table f = q;
            for (std::size_t h = 0; h < f.horizon(); ++h)
                for (std::size_t x = 0; x < f.num_states(h); ++x)
                    for (auto& v : f.row(h, x)) v += rng.uniform(-o.perturbation, o.perturbation);
            fs.push_back({"perturbed" + std::to_string(k), clip_to_range(std::move(f))});
        }
    } else {
        for (double c : o.shifts) {
            Table f = q;
            for (std::size_t x = 0; x < f.num_states(0); ++x)
                for (auto& v : f.row(0, x)) v -= c;
            std::ostringstream name;
            name << "shift" << c;
            fs.push_back({name.str(), clip_to_range(std::move(f))});
        }
    }
    if (fs.empty()) throw std::invalid_argument("random_instance: the function class would be empty");
    inst.F = FunctionClass(std::move(fs));

    std::vector<NamedTable> ws;
    if (o.include_w_star) {
        const DensityRatio ratio = density_ratio(d_star, inst.data_dist);
        if (ratio.exists()) ws.push_back({"w*", *ratio.weights});
    }
    for (std::size_t k = 0; k < o.w_distractors; ++k)
        ws.push_back({"regular" + std::to_string(k), random_regular_weight(inst.data_dist, rng.next_u64())});
    if (ws.empty()) throw std::invalid_argument("random_instance: the weight class would be empty");
    inst.W = WeightClass(std::move(ws));

    inst.annotations = annotate(inst);
    if (o.gap_floor > 0.0 && inst.annotations.gap_q_star < o.gap_floor)
        throw std::logic_error("random_instance: gap floor not met after construction");
    return inst;
}

}  // namespace pabc
