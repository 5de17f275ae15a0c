#pragma once

#include "inslab/planning/grid.hpp"
#include "inslab/planning/tabular_mdp.hpp"

#include <vector>

namespace inslab::theorylab {

// Single-step two-bit MDP: from any decision cell, action 0 emits perfectly
// correlated bits (s1 = s2 = 1 w.p. 0.6, = 0 w.p. 0.4) and action 1 emits two
// independent fair bits. Outcome cells are absorbing; r_next = 1{s1 = s2}.
struct TwoBitMdp {
    planning::Grid grid;        // 2 x 2 cells with centers 0 and 1
    planning::TabularMDP mdp_true;
    planning::TabularMDP mdp_lagged;
    int start_state = 0;
    std::vector<double> reward_match;  // 1{s1 = s2} over all states
    std::vector<double> reward_s1;     // s1 over all states (coordinate function)
};

TwoBitMdp make_two_bit_mdp(double p_high = 0.6);

// Multi-step MDP whose per-dimension marginals depend only on their own
// dimension (dim 0 on the action too) while the joint couples the two
// dimensions: joint = (1 - lambda) * product + lambda * comonotone coupling.
// Marginals match the product exactly, so laggedize recovers the product; the
// joint itself is not a product whenever lambda > 0.
struct FactoredMdp {
    planning::Grid grid;  // n0 x n1 cells
    planning::TabularMDP mdp;            // reward left at zero; set via r_next
    double lambda = 0.0;
};

FactoredMdp make_factored_mdp(int cells_per_dim = 4, double lambda = 0.5, double gamma = 0.9);

// r_next vectors over the factored MDP's states.
std::vector<double> factored_separable_reward(const FactoredMdp& f);  // s1^2 + s2
std::vector<double> factored_cross_reward(const FactoredMdp& f);      // s1 * s2

}  // namespace inslab::theorylab
