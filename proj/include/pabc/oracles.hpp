#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pabc/mdp.hpp"

// Reference computations that share no code with the dynamic-programming,
// data and function-class modules. Everything here is straight-line loops
// over the raw MDP arrays.

namespace pabc::oracle {

struct BruteForceOptimum {
    double value = 0.0;
    std::vector<std::vector<std::size_t>> actions;  ///< [h][x], the first maximizing policy in enumeration order
    std::size_t policies_checked = 0;
};

/// Enumerates every deterministic policy and scores it by summing over the
/// trajectory tree from x_0. Throws std::length_error when the number of
/// policies exceeds `budget`.
BruteForceOptimum brute_force_optimal(const LayeredMdp& mdp, std::size_t budget = 1'000'000);

/// Number of deterministic policies, saturating at SIZE_MAX.
std::size_t policy_count(const LayeredMdp& mdp);

/// Expected return of a deterministic policy by trajectory-tree summation.
double tree_value(const LayeredMdp& mdp, const std::vector<std::vector<std::size_t>>& actions);

/// E[sum_h 1{a(x_h) != b(x_h)}] along b's trajectory tree.
double tree_disagreement(const LayeredMdp& mdp, const std::vector<std::vector<std::size_t>>& a,
                         const std::vector<std::vector<std::size_t>>& b);

struct EpsValues {
    double eps_W = 0.0;
    double eps_F = 0.0;
    double eps_F_inf = 0.0;
};

/// Misspecification errors evaluated from their definitions with naive loops.
EpsValues brute_force_eps(std::span<const Table> F, std::span<const Table> W, const LayeredMdp& mdp,
                          const Table& data_dist);

}  // namespace pabc::oracle
