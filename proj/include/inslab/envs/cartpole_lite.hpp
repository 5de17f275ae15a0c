#pragma once

#include "inslab/envs/env.hpp"
#include "inslab/envs/wrappers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace inslab::envs {

// Extra-reward families layered on the survival reward. State layout is
// (x, xdot, theta, thetadot). Families B..E add -(s_i+s_j)^2 terms normalized
// to [-1, 0]; the designated pairs and whether their injected noise is
// dependent follow the family definition:
//   Original  no extra term,            noise dependent on (xdot, thetadot)
//   A         -s_i^2 (default theta),   noise dependent on (xdot, thetadot)
//   B         pair (x, theta),          noise on that pair independent
//   C         pair (xdot, thetadot),    noise dependent
//   D         pairs (xdot, thetadot) and (x, theta), both dependent
//   E         pair (xdot, thetadot),    noise dependent, correlation 0.9
enum class RewardFamilyTag { Original, A, B, C, D, E };

struct RewardFamily {
    RewardFamilyTag tag = RewardFamilyTag::Original;
    int i = 2, j = 3, k = 0, m = 2;           // dims; defaults re-set per tag
    std::optional<double> corr_override;       // family E pins 0.9

    static RewardFamily make(RewardFamilyTag tag);
    // Index pairs whose injected noise is correlated for this family.
    std::vector<std::pair<int, int>> dependent_pairs() const;
    // Index pairs entering the extra reward (empty for Original/A).
    std::vector<std::pair<int, int>> reward_pairs() const;
    double correlation(double default_corr) const;
    std::string name() const;
};

RewardFamilyTag reward_family_from_name(const std::string& name);

struct CartPoleLiteParams {
    double gravity = 9.8;
    double mass_cart = 1.0;
    double mass_pole = 0.1;
    double half_length = 0.5;
    double force_mag = 10.0;
    double dt = 0.02;  // Euler integration step
    double theta_bound = 12.0 * 3.14159265358979323846 / 180.0;
    double x_bound = 2.4;
    int max_steps = 200;
    double discount = 0.99;
};

// Cart-pole with Euler dynamics, additive displacement-proportional noise on
// the family's dependent pairs, survival reward 1 per step plus the family's
// normalized extra term. Norm bounds are calibrated once at construction and
// frozen (deterministic given calibration_seed).
class CartPoleLiteEnv final : public Env {
public:
    CartPoleLiteEnv(RewardFamily family, NoiseInjectConfig noise,
                    CartPoleLiteParams params = {}, std::uint64_t calibration_seed = 0);

    int state_dim() const override { return 4; }
    int n_actions() const override { return 2; }
    StateVec initial_state(RngStream& rng) const override;
    StepResult step(const StateVec& s, ActionId a, RngStream& rng) const override;
    bool terminal_state(const StateVec& s) const override;
    double reward(const StateVec& s, ActionId a, const StateVec& next) const override;
    int max_steps() const override { return params_.max_steps; }
    double discount() const override { return params_.discount; }

    // Normalized family term, in [-1, 0]; 0 at the upright rest state.
    double family_term(const StateVec& s) const;
    const RewardFamily& family() const { return family_; }
    const NoiseInjectConfig& noise() const { return noise_; }

    // Deterministic Euler update with no injected noise.
    StateVec deterministic_next(const StateVec& s, ActionId a) const;

private:
    RewardFamily family_;
    NoiseInjectConfig noise_;
    CartPoleLiteParams params_;
    std::vector<std::pair<double, double>> term_bounds_;  // per reward term
};

// Spec-facing single-step form.
StepResult cartpole_lite_step(const CartPoleLiteEnv& env, const StateVec& s, ActionId a,
                              RngStream& rng);

}  // namespace inslab::envs
