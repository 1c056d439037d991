#include "pabc/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pabc/dynamic_programming.hpp"
#include "pabc/rng.hpp"

namespace pabc {

std::vector<std::string> check_data_distribution(const LayeredMdp& mdp, const Table& data_dist) {
    std::vector<std::string> problems;
    if (!data_dist.same_shape(mdp.shape())) {
        problems.push_back("data distribution shape does not match the MDP");
        return problems;
    }
    if (data_dist.role() != TableRole::data_distribution) problems.push_back("table role is not data-distribution");
    Table as_dist = data_dist;
    as_dist.set_role(TableRole::data_distribution);
    for (auto& p : check_table(as_dist)) problems.push_back(std::move(p));
    return problems;
}

namespace {

/// Cumulative sums for repeated inverse-CDF draws.
class CumulativeSampler {
public:
    explicit CumulativeSampler(std::span<const double> weights) {
        cumulative_.reserve(weights.size());
        double acc = 0.0;
        for (double w : weights) {
            acc += std::max(w, 0.0);
            cumulative_.push_back(acc);
        }
    }

    std::size_t draw(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        auto idx = static_cast<std::size_t>(it - cumulative_.begin());
        // skip zero-width cells that upper_bound can only land on through rounding
        while (idx > 0 && cumulative_[idx] == cumulative_[idx - 1]) --idx;
        return idx;
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace

Dataset sample_dataset(const LayeredMdp& mdp, const Table& data_dist, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_dataset: n must be positive");
    require_valid(mdp);
    const auto problems = check_data_distribution(mdp, data_dist);
    if (!problems.empty()) throw std::invalid_argument("invalid data distribution: " + problems.front());

    Dataset data;
    data.seed = seed;
    data.n = n;
    data.timesteps.resize(mdp.horizon);
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
        std::vector<double> flat;
        std::vector<std::pair<std::size_t, std::size_t>> cells;
        for (std::size_t x = 0; x < mdp.num_states(h); ++x)
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
                flat.push_back(data_dist(h, x, a));
                cells.emplace_back(x, a);
            }
        const CumulativeSampler pair_sampler(flat);

        std::vector<std::vector<CumulativeSampler>> next_samplers(mdp.num_states(h));
        for (std::size_t x = 0; x < mdp.num_states(h); ++x)
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a)
                next_samplers[x].emplace_back(mdp.next_state_probs(h, x, a));

        Rng rng(derive_seed(seed, h));
        auto& out = data.timesteps[h];
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto [x, a] = cells[pair_sampler.draw(rng)];
            const std::size_t y = next_samplers[x][a].draw(rng);
            out.push_back({x, a, mdp.reward(h, x, a), y});
        }
    }
    return data;
}

std::vector<std::string> check_dataset(const LayeredMdp& mdp, const Dataset& data) {
    std::vector<std::string> problems;
    if (data.timesteps.size() != mdp.horizon) {
        problems.push_back("dataset horizon differs from the MDP horizon");
        return problems;
    }
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
        const std::string at = "timestep " + std::to_string(h);
        if (data.timesteps[h].size() != data.n) problems.push_back(at + ": tuple count differs from n");
        for (const auto& t : data.timesteps[h]) {
            if (t.state >= mdp.num_states(h) || t.action >= mdp.num_actions(h, t.state)) {
                problems.push_back(at + ": state/action index out of range");
                break;
            }
            if (t.next_state >= mdp.num_states(h + 1)) {
                problems.push_back(at + ": next state outside the next layer");
                break;
            }
            if (t.reward != mdp.reward(h, t.state, t.action)) {
                problems.push_back(at + ": reward differs from R_h(x, a)");
                break;
            }
        }
    }
    return problems;
}

DensityRatio density_ratio(const Table& occ, const Table& data_dist) {
    if (occ.shape() != data_dist.shape()) throw std::invalid_argument("density_ratio: shape mismatch");
    DensityRatio out;
    Table w(occ.shape(), TableRole::weight);
    for (std::size_t h = 0; h < occ.horizon(); ++h)
        for (std::size_t x = 0; x < occ.num_states(h); ++x)
            for (std::size_t a = 0; a < occ.num_actions(h, x); ++a) {
                const double num = occ(h, x, a);
                const double den = data_dist(h, x, a);
                if (den > 0.0) {
                    w(h, x, a) = num / den;
                } else if (num > 0.0) {
                    out.uncovered = Cell{h, x, a};
                    return out;
                }
            }
    out.weights = std::move(w);
    return out;
}

DensityRatio density_ratio(const LayeredMdp& mdp, const Policy& pi, const Table& data_dist) {
    return density_ratio(occupancy(mdp, pi), data_dist);
}

double concentrability(const LayeredMdp& mdp, const Policy& pi, const Table& data_dist) {
    const auto ratio = density_ratio(mdp, pi, data_dist);
    if (!ratio.exists()) return std::numeric_limits<double>::infinity();
    return ratio.weights->max_abs();
}

double class_bound_C(std::span<const Table> weights) {
    if (weights.empty()) throw std::invalid_argument("class_bound_C: empty weight class");
    double c = 0.0;
    for (const auto& w : weights) c = std::max(c, w.max_abs());
    return c;
}

double expectation(const Table& dist, const Table& g, std::size_t h) {
    double s = 0.0;
    for (std::size_t x = 0; x < dist.num_states(h); ++x) {
        const auto p = dist.row(h, x);
        const auto v = g.row(h, x);
        for (std::size_t a = 0; a < p.size(); ++a) s += p[a] * v[a];
    }
    return s;
}

double weighted_expectation(const Table& dist, const Table& w, const Table& g, std::size_t h) {
    double s = 0.0;
    for (std::size_t x = 0; x < dist.num_states(h); ++x) {
        const auto p = dist.row(h, x);
        const auto wr = w.row(h, x);
        const auto v = g.row(h, x);
        for (std::size_t a = 0; a < p.size(); ++a) s += p[a] * wr[a] * v[a];
    }
    return s;
}

}  // namespace pabc
