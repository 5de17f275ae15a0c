#include "inslab/envs/driving.hpp"

#include <cmath>
#include <stdexcept>

namespace inslab::envs {

void DrivingParams::validate() const {
    if (!(dv[1] > dv[0] && dv[0] > 0.0))
        throw std::invalid_argument("DrivingParams: require dv[1] > dv[0] > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("DrivingParams: dt must be positive");
    if (sigma_v < 0.0 || sigma_p < 0.0)
        throw std::invalid_argument("DrivingParams: noise scales must be nonnegative");
    if (g_ratio < 0.0) throw std::invalid_argument("DrivingParams: g_ratio must be nonnegative");
    if (!(goal_radius > 0.0))
        throw std::invalid_argument("DrivingParams: goal_radius must be positive");
    if (max_steps < 1) throw std::invalid_argument("DrivingParams: max_steps must be >= 1");
    if (discount < 0.0 || discount > 1.0)
        throw std::invalid_argument("DrivingParams: discount outside [0,1]");
}

namespace {

double quad_terminal_value(double p, double v) {
    const double r = std::abs(p) + std::abs(v);
    return -r * r;
}

double reward_for(const DrivingParams& params, const StateVec& s, const StateVec& next,
                  bool terminal) {
    switch (params.reward_mode) {
        case DrivingRewardMode::step_penalty:
            return params.step_penalty;
        case DrivingRewardMode::pv_product:
            return next[0] * next[1] - s[0] * s[1];
        case DrivingRewardMode::terminal_quadratic:
            return terminal ? quad_terminal_value(next[0], next[1]) : 0.0;
    }
    return 0.0;
}

}  // namespace

StepResult driving_step(const DrivingParams& params, const StateVec& s, ActionId a,
                        RngStream& rng) {
    if (a < 0 || a > 1) throw std::invalid_argument("driving_step: action must be 0 or 1");
    if (s.size() != 2) throw std::invalid_argument("driving_step: state must be (p, v)");
    const double p = s[0];
    const double v = s[1];
    double coeff = 1.0;
    if (params.sign_mode == DrivingSignMode::main_text)
        coeff = (p >= 0.0) ? -1.0 : 1.0;  // -p/|p| with sign(0) = +1
    const double dv = params.dv[static_cast<std::size_t>(a)];
    const double v_noise_scale = params.g(a) * params.sigma_v;
    const double vp = v + coeff * dv + (v_noise_scale > 0.0 ? v_noise_scale * rng.normal() : 0.0);
    const double pp =
        p + vp * params.dt + (params.sigma_p > 0.0 ? params.sigma_p * rng.normal() : 0.0);

    StepResult out;
    out.next = {pp, vp};
    out.terminal = std::sqrt(pp * pp + vp * vp) < params.goal_radius;
    if (!std::isfinite(pp) || !std::isfinite(vp)) {
        out.next = {0.0, 0.0};
        out.terminal = true;
        out.overflow = true;
    }
    out.reward = reward_for(params, s, out.next, out.terminal);
    return out;
}

DrivingEnv::DrivingEnv(DrivingParams params) : params_(params) { params_.validate(); }

StateVec DrivingEnv::initial_state(RngStream& rng) const {
    // Start states uniform on [-2,2]^2, re-drawn if already inside the goal.
    for (;;) {
        const double p = rng.uniform(-2.0, 2.0);
        const double v = rng.uniform(-2.0, 2.0);
        if (std::sqrt(p * p + v * v) >= params_.goal_radius) return {p, v};
    }
}

StepResult DrivingEnv::step(const StateVec& s, ActionId a, RngStream& rng) const {
    return driving_step(params_, s, a, rng);
}

bool DrivingEnv::terminal_state(const StateVec& s) const {
    return std::sqrt(s[0] * s[0] + s[1] * s[1]) < params_.goal_radius;
}

double DrivingEnv::reward(const StateVec& s, ActionId, const StateVec& next) const {
    return reward_for(params_, s, next, terminal_state(next));
}

}  // namespace inslab::envs
