#include "pabc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pabc::oracle {

namespace {

using Actions = std::vector<std::vector<std::size_t>>;

double subtree(const LayeredMdp& m, const Actions& pi, std::size_t h, std::size_t x) {
    if (h == m.horizon) return 0.0;
    const std::size_t a = pi[h][x];
    double total = m.rewards[h][x][a];
    const auto& row = m.transitions[h][x][a];
    for (std::size_t y = 0; y < row.size(); ++y)
        if (row[y] > 0.0) total += row[y] * subtree(m, pi, h + 1, y);
    return total;
}

double disagree_subtree(const LayeredMdp& m, const Actions& a, const Actions& b, std::size_t h, std::size_t x) {
    if (h == m.horizon) return 0.0;
    const std::size_t act = b[h][x];
    double total = a[h][x] != act ? 1.0 : 0.0;
    const auto& row = m.transitions[h][x][act];
    for (std::size_t y = 0; y < row.size(); ++y)
        if (row[y] > 0.0) total += row[y] * disagree_subtree(m, a, b, h + 1, y);
    return total;
}

}  // namespace

std::size_t policy_count(const LayeredMdp& mdp) {
    std::size_t count = 1;
    for (std::size_t h = 0; h < mdp.horizon; ++h)
        for (const auto& acts : mdp.actions[h]) {
            if (acts.empty()) return 0;
            if (count > std::numeric_limits<std::size_t>::max() / acts.size())
                return std::numeric_limits<std::size_t>::max();
            count *= acts.size();
        }
    return count;
}

double tree_value(const LayeredMdp& mdp, const Actions& actions) { return subtree(mdp, actions, 0, mdp.initial_state); }

double tree_disagreement(const LayeredMdp& mdp, const Actions& a, const Actions& b) {
    return disagree_subtree(mdp, a, b, 0, mdp.initial_state);
}

BruteForceOptimum brute_force_optimal(const LayeredMdp& mdp, std::size_t budget) {
    const std::size_t total = policy_count(mdp);
    if (total > budget) throw std::length_error("policy enumeration exceeds the budget");

    Actions pi(mdp.horizon);
    for (std::size_t h = 0; h < mdp.horizon; ++h) pi[h].assign(mdp.layers[h].size(), 0);

    BruteForceOptimum best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < total; ++k) {
        const double v = tree_value(mdp, pi);
        ++best.policies_checked;
        if (v > best.value) {
            best.value = v;
            best.actions = pi;
        }
        // mixed-radix increment
        for (std::size_t h = 0; h < mdp.horizon; ++h) {
            bool carry = false;
            for (std::size_t x = 0; x < pi[h].size(); ++x) {
                if (++pi[h][x] < mdp.actions[h][x].size()) {
                    carry = false;
                    break;
                }
                pi[h][x] = 0;
                carry = true;
            }
            if (!carry) break;
        }
    }
    return best;
}

EpsValues brute_force_eps(std::span<const Table> F, std::span<const Table> W, const LayeredMdp& mdp,
                          const Table& dD) {
    if (F.empty() || W.empty()) throw std::invalid_argument("brute_force_eps: empty class");
    const std::size_t H = mdp.horizon;

    // Q* by naive backward loops
    std::vector<std::vector<std::vector<double>>> q(H);
    std::vector<double> vnext(mdp.layers[H].size(), 0.0);
    for (std::size_t h = H; h-- > 0;) {
        q[h].resize(mdp.layers[h].size());
        std::vector<double> v(mdp.layers[h].size());
        for (std::size_t x = 0; x < mdp.layers[h].size(); ++x) {
            double best = -1e300;
            for (std::size_t a = 0; a < mdp.actions[h][x].size(); ++a) {
                double val = mdp.rewards[h][x][a];
                for (std::size_t y = 0; y < vnext.size(); ++y) val += mdp.transitions[h][x][a][y] * vnext[y];
                q[h][x].push_back(val);
                if (val > best) best = val;
            }
            v[x] = best;
        }
        vnext = v;
    }
    double v_star = -1e300;
    for (double val : q[0][mdp.initial_state]) v_star = std::max(v_star, val);

    // d* of the first-index greedy policy of Q*
    std::vector<std::vector<std::vector<double>>> dstar(H);
    std::vector<double> mu(mdp.layers[0].size(), 0.0);
    mu[mdp.initial_state] = 1.0;
    for (std::size_t h = 0; h < H; ++h) {
        dstar[h].resize(mdp.layers[h].size());
        std::vector<double> next(mdp.layers[h + 1].size(), 0.0);
        for (std::size_t x = 0; x < mdp.layers[h].size(); ++x) {
            dstar[h][x].assign(mdp.actions[h][x].size(), 0.0);
            std::size_t arg = 0;
            for (std::size_t a = 1; a < q[h][x].size(); ++a)
                if (q[h][x][a] > q[h][x][arg]) arg = a;
            dstar[h][x][arg] = mu[x];
            for (std::size_t y = 0; y < next.size(); ++y) next[y] += mu[x] * mdp.transitions[h][x][arg][y];
        }
        mu = next;
    }

    // f - T f for every member, using max over the next layer
    auto residual = [&](const Table& f) {
        std::vector<std::vector<std::vector<double>>> r(H);
        for (std::size_t h = 0; h < H; ++h) {
            r[h].resize(mdp.layers[h].size());
            for (std::size_t x = 0; x < mdp.layers[h].size(); ++x)
                for (std::size_t a = 0; a < mdp.actions[h][x].size(); ++a) {
                    double backup = mdp.rewards[h][x][a];
                    if (h + 1 < H)
                        for (std::size_t y = 0; y < mdp.layers[h + 1].size(); ++y) {
                            double m = -1e300;
                            for (std::size_t b = 0; b < mdp.actions[h + 1][y].size(); ++b) m = std::max(m, f(h + 1, y, b));
                            backup += mdp.transitions[h][x][a][y] * m;
                        }
                    r[h][x].push_back(f(h, x, a) - backup);
                }
        }
        return r;
    };
    std::vector<std::vector<std::vector<std::vector<double>>>> res;
    for (const auto& f : F) res.push_back(residual(f));

    EpsValues out;
    out.eps_W = std::numeric_limits<double>::infinity();
    for (const auto& w : W) {
        double worst = 0.0;
        for (const auto& r : res)
            for (std::size_t h = 0; h < H; ++h) {
                double under_data = 0.0, under_opt = 0.0;
                for (std::size_t x = 0; x < r[h].size(); ++x)
                    for (std::size_t a = 0; a < r[h][x].size(); ++a) {
                        under_data += dD(h, x, a) * w(h, x, a) * r[h][x][a];
                        under_opt += dstar[h][x][a] * r[h][x][a];
                    }
                worst = std::max(worst, std::fabs(under_data - under_opt));
            }
        out.eps_W = std::min(out.eps_W, worst);
    }

    out.eps_F = std::numeric_limits<double>::infinity();
    out.eps_F_inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < F.size(); ++i) {
        const auto& f = F[i];
        double f0 = -1e300;
        for (std::size_t a = 0; a < mdp.actions[0][mdp.initial_state].size(); ++a) f0 = std::max(f0, f(0, mdp.initial_state, a));
        double worst = 0.0;
        for (const auto& w : W)
            for (std::size_t h = 0; h < H; ++h) {
                double s = 0.0;
                for (std::size_t x = 0; x < res[i][h].size(); ++x)
                    for (std::size_t a = 0; a < res[i][h][x].size(); ++a) s += dD(h, x, a) * w(h, x, a) * res[i][h][x][a];
                worst = std::max(worst, std::fabs(s));
            }
        out.eps_F = std::min(out.eps_F, worst + std::fabs(f0 - v_star));

        double sup = 0.0;
        for (std::size_t h = 0; h < H; ++h)
            for (std::size_t x = 0; x < q[h].size(); ++x)
                for (std::size_t a = 0; a < q[h][x].size(); ++a) sup = std::max(sup, std::fabs(f(h, x, a) - q[h][x][a]));
        out.eps_F_inf = std::min(out.eps_F_inf, sup);
    }
    return out;
}

}  // namespace pabc::oracle
