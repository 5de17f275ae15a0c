#pragma once

#include "inslab/envs/env.hpp"

#include <utility>
#include <vector>

namespace inslab::envs {

// Additive state noise with per-dimension variance proportional to the step
// displacement: Var(e_i) = r_noise * |next_i - prev_i| (absolute value; the
// displacement can be negative). Dimensions listed in `pairs` receive jointly
// Gaussian noise with correlation pair_corr; all other dimensions are
// independent. Pairs must be disjoint.
struct NoiseInjectConfig {
    double r_noise = 0.0;
    double pair_corr = 0.0;
    std::vector<std::pair<int, int>> pairs;

    void validate(int dim) const;
};

StateVec wrap_noise_inject(const StateVec& base_next, const StateVec& prev,
                           const NoiseInjectConfig& cfg, RngStream& rng);

// Extra reward r_reward * (1/N_d) * sum_pairs Norm((s_i + s_j)^2) with
// Norm(x) = clamp((x - lo)/(hi - lo), 0, 1) per pair.
struct RewardAugmentConfig {
    double r_reward = 0.0;
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::pair<double, double>> norm_bounds;  // (lo, hi) per pair

    void validate(int dim) const;
};

double wrap_reward_augment(double base_r, const StateVec& s_next,
                           const RewardAugmentConfig& cfg);

// Applies noise injection and/or reward augmentation around a base env.
// Termination is re-evaluated on the noisy next state; augmentation reads the
// observed (noisy) next state. Reward-augment norm bounds, when not supplied,
// are calibrated from a random-policy rollout (1st/99th percentile of
// (s_i+s_j)^2 over 10^4 steps) and frozen at construction.
class WrappedEnv final : public Env {
public:
    WrappedEnv(EnvPtr base, NoiseInjectConfig noise, RewardAugmentConfig augment,
               std::uint64_t calibration_seed = 0);

    int state_dim() const override { return base_->state_dim(); }
    int n_actions() const override { return base_->n_actions(); }
    StateVec initial_state(RngStream& rng) const override { return base_->initial_state(rng); }
    StepResult step(const StateVec& s, ActionId a, RngStream& rng) const override;
    bool terminal_state(const StateVec& s) const override { return base_->terminal_state(s); }
    double reward(const StateVec& s, ActionId a, const StateVec& next) const override;
    int max_steps() const override { return base_->max_steps(); }
    double discount() const override { return base_->discount(); }

    const RewardAugmentConfig& augment() const { return augment_; }

private:
    EnvPtr base_;
    NoiseInjectConfig noise_;
    RewardAugmentConfig augment_;
};

// Calibrates Norm bounds for the given pairs on `env` (random policy,
// `steps` transitions, 1st/99th percentiles of (s_i+s_j)^2).
std::vector<std::pair<double, double>> calibrate_norm_bounds(
    const Env& env, const std::vector<std::pair<int, int>>& pairs, int steps,
    RngStream rng);

}  // namespace inslab::envs
