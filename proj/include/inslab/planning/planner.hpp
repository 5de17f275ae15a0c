#pragma once

#include "inslab/envs/driving.hpp"
#include "inslab/envs/env.hpp"
#include "inslab/planning/grid.hpp"
#include "inslab/planning/tabular_mdp.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace inslab::planning {

struct DiscretizeOptions {
    // One-step mode: every action leads to an absorbing outcome block
    // (decision cells 0..N-1, outcome cells N..N+M-1) and the reward is
    // r_next evaluated at outcome centers.
    bool one_step = false;
    // Outcome binning for one-step MDPs. Defaults to the decision grid; a
    // wider grid keeps boundary cells from clamping the next-state
    // distribution.
    std::optional<Grid> outcome_grid;
    // Reward mediated by the next state, evaluated at cell centers. Stored on
    // the MDP so laggedize can recompute expected rewards.
    std::function<double(const StateVec&)> next_state_reward;
    // When false (default), R[s][a] accumulates the sample-mean env reward.
    bool use_env_reward = true;
};

// Monte-Carlo discretization: P[s][a] from n_mc env steps at the cell center,
// binned to cells (rows sum to 1 exactly, counts/n_mc); R[s][a] the
// sample-mean reward. Cells are terminal iff the env says their center is.
// Per-(state,action) split streams make the result independent of sweep
// order.
TabularMDP discretize(const envs::Env& env, const Grid& grid, int n_mc, RngStream& rng,
                      const DiscretizeOptions& opts = {});

// Product-of-marginals ("lagged") counterpart: every row is replaced by the
// product of its per-dimension marginals (kept in factored form); expected
// rewards are recomputed from the MDP's next-state reward when present.
TabularMDP laggedize(const TabularMDP& mdp, const Grid& grid);

// Monte-Carlo policy return on the environment: mean and sample std of the
// discounted episode return. The policy acts through the grid.
std::pair<double, double> policy_return(const envs::Env& env, const TabularPolicy& policy,
                                        const Grid& grid, int n_episodes, double gamma,
                                        RngStream& rng);

// Monte-Carlo policy return by simulating the tabular MDP from uniformly
// sampled start states.
std::pair<double, double> policy_return(const TabularMDP& mdp, const TabularPolicy& policy,
                                        const std::vector<int>& start_states, int n_episodes,
                                        RngStream& rng, int max_steps = 100000);

struct EpisodeMetrics {
    double return_mean = 0.0, return_std = 0.0;
    double distance_mean = 0.0, distance_std = 0.0;
    double length_mean = 0.0, length_std = 0.0;
};

// Return / final-distance / episode-length metrics (Table-2 style).
EpisodeMetrics evaluate_policy_metrics(const envs::Env& env, const TabularPolicy& policy,
                                       const Grid& grid, int n_episodes, double gamma,
                                       RngStream& rng);

struct Witness {
    int state = 0;
    int a0 = 0;  // true-optimal action
    int a1 = 0;  // lagged-optimal action
};

// Lemma-4.1 witnesses: states reachable (support reachability) from the start
// states under the true optimal policy where the two policies disagree and
// both strict inequalities hold.
std::vector<Witness> consistency_check(const TabularMDP& mdp_true, const TabularMDP& mdp_lagged,
                                       const std::vector<int>& start_states,
                                       double margin = 0.0);

struct RegionBounds {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
};

// Closed-form band of p/dt + 2v where the lagged-optimal action differs from
// the true-optimal action (appendix one-step analysis of V = p*v):
//   upper = -(dv1 + dv0)
//   lower = upper - sigma_v^2 (g1^2 - g0^2) / (dv1 - dv0)
RegionBounds driving_region(const envs::DrivingParams& params);

struct PolicyMap {
    int n0 = 0, n1 = 0;             // cells along dim 0 / dim 1
    std::vector<int> actions;        // row-major [c0 * n1 + c1]
    int at(int c0, int c1) const { return actions[static_cast<std::size_t>(c0) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(c1)]; }
};

// Outcome grid for one-step driving MDPs: the decision grid widened by the
// 3-sigma reach of one transition, at the same cell width.
Grid driving_outcome_grid(const envs::DrivingParams& params, const Grid& decision_grid);

// Chosen action at every cell center of a 2-D grid.
PolicyMap policy_map(const TabularPolicy& policy, const Grid& grid);

std::string policy_map_csv(const PolicyMap& map);

}  // namespace inslab::planning
