#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pabc/mdp.hpp"

namespace pabc {

/// One offline sample (x_h, a_h, r_h, x_{h+1}); states are layer-local indices.
struct Transition {
    std::size_t state = 0;
    std::size_t action = 0;
    double reward = 0.0;
    std::size_t next_state = 0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Per-timestep i.i.d. tuple sets. Tuples at different timesteps are drawn
/// independently; they do not form trajectories.
struct Dataset {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::vector<std::vector<Transition>> timesteps;

    std::size_t horizon() const { return timesteps.size(); }
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Problems with a data distribution d^D for this MDP: role, normalization,
/// nonnegativity and shape.
std::vector<std::string> check_data_distribution(const LayeredMdp& mdp, const Table& data_dist);

/// Draws n tuples per timestep: (x, a) ~ d^D_h, r = R_h(x, a), x' ~ P_h(.|x, a).
/// Timestep h uses the substream derive_seed(seed, h).
Dataset sample_dataset(const LayeredMdp& mdp, const Table& data_dist, std::size_t n, std::uint64_t seed);

/// Checks the tuple invariants (exact rewards, valid indices, counts).
std::vector<std::string> check_dataset(const LayeredMdp& mdp, const Dataset& data);

struct Cell {
    std::size_t h = 0;
    std::size_t x = 0;
    std::size_t a = 0;
};

/// Result of d^pi / d^D. `weights` is empty when d^pi puts mass on a pair
/// that d^D does not cover; `uncovered` then names the first such pair.
/// Pairs where both densities vanish get weight 0.
struct DensityRatio {
    std::optional<Table> weights;
    std::optional<Cell> uncovered;

    bool exists() const { return weights.has_value(); }
};

DensityRatio density_ratio(const LayeredMdp& mdp, const Policy& pi, const Table& data_dist);
DensityRatio density_ratio(const Table& occupancy, const Table& data_dist);

/// max over (h, x, a) of d^pi / d^D, or +inf when the ratio is undefined.
double concentrability(const LayeredMdp& mdp, const Policy& pi, const Table& data_dist);

/// max |w_h(x, a)| over members; throws std::invalid_argument when empty.
double class_bound_C(std::span<const Table> weights);

/// sum_{x,a} dist_h(x,a) * g_h(x,a)
double expectation(const Table& dist, const Table& g, std::size_t h);
/// sum_{x,a} dist_h(x,a) * w_h(x,a) * g_h(x,a)
double weighted_expectation(const Table& dist, const Table& w, const Table& g, std::size_t h);

}  // namespace pabc
