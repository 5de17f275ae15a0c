#pragma once

#include "inslab/envs/env.hpp"

#include <array>

namespace inslab::envs {

// 1-D driving task: state (p, v), two acceleration levels. The velocity noise
// g(a)*eps_v feeds the position update within the same step, which is the
// instantaneous dependence this environment exists to exhibit.
//
// sign_mode main_text multiplies the velocity change by -p/|p| (actions always
// push toward the origin); appendix mode applies it with coefficient +1.
// reward_mode selects between the -1 step penalty, the telescoping product
// reward p'v' - pv, and a quadratic terminal payout -(|p|+|v|)^2.
enum class DrivingSignMode { main_text, appendix };
enum class DrivingRewardMode { step_penalty, pv_product, terminal_quadratic };

struct DrivingParams {
    std::array<double, 2> dv{0.1, 1.0};  // velocity change per action
    double dt = 1.0;
    double sigma_v = 1.0;
    double sigma_p = 0.0;
    double g_ratio = 0.1;  // g(a) = g_ratio * dv(a)
    double goal_radius = 0.1;
    double step_penalty = -1.0;
    int max_steps = 200;
    double discount = 1.0;
    DrivingSignMode sign_mode = DrivingSignMode::main_text;
    DrivingRewardMode reward_mode = DrivingRewardMode::step_penalty;

    double g(int action) const { return g_ratio * dv[static_cast<std::size_t>(action)]; }
    void validate() const;
};

// One transition. p == 0 in main_text mode uses sign(0) = +1 (documented
// tie-break; the coefficient is then -1).
StepResult driving_step(const DrivingParams& params, const StateVec& s, ActionId a,
                        RngStream& rng);

class DrivingEnv final : public Env {
public:
    explicit DrivingEnv(DrivingParams params);

    int state_dim() const override { return 2; }
    int n_actions() const override { return 2; }
    StateVec initial_state(RngStream& rng) const override;
    StepResult step(const StateVec& s, ActionId a, RngStream& rng) const override;
    bool terminal_state(const StateVec& s) const override;
    double reward(const StateVec& s, ActionId a, const StateVec& next) const override;
    int max_steps() const override { return params_.max_steps; }
    double discount() const override { return params_.discount; }

    const DrivingParams& params() const { return params_; }

private:
    DrivingParams params_;
};

}  // namespace inslab::envs
