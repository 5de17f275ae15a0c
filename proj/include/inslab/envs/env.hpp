#pragma once

#include "inslab/rng.hpp"
#include "inslab/types.hpp"

#include <memory>

namespace inslab::envs {

struct StepResult {
    StateVec next;
    double reward = 0.0;
    bool terminal = false;
    bool overflow = false;  // numeric guard tripped; also implies terminal
};

// Stochastic environment with a pure transition: step() is a function of
// (state, action, stream) only, so planners can sample transitions from any
// state. Episode bookkeeping (step budgets) lives in the runners.
class Env {
public:
    virtual ~Env() = default;

    virtual int state_dim() const = 0;
    virtual int n_actions() const = 0;
    virtual StateVec initial_state(RngStream& rng) const = 0;
    virtual StepResult step(const StateVec& s, ActionId a, RngStream& rng) const = 0;

    // True iff `s` is terminal on arrival.
    virtual bool terminal_state(const StateVec& s) const { (void)s; return false; }

    // Reward oracle for model rollouts: the reward the environment would pay
    // for landing in `next` after taking `a` in `s`.
    virtual double reward(const StateVec& s, ActionId a, const StateVec& next) const = 0;

    virtual int max_steps() const = 0;
    virtual double discount() const = 0;
};

using EnvPtr = std::shared_ptr<const Env>;

}  // namespace inslab::envs
