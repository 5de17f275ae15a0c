#pragma once

#include "inslab/models.hpp"
#include "inslab/rng.hpp"
#include "inslab/types.hpp"

#include <functional>

namespace inslab::rollout {

struct RolloutConfig {
    int k = 1;         // rollout horizon
    int n_starts = 1;  // informational; starts vector drives the loop
    int branch = 1;    // rollouts per start
};

using PolicyFn = std::function<ActionId(const StateVec&, RngStream&)>;
using RewardFn = std::function<double(const StateVec&, ActionId, const StateVec&)>;
using TerminalFn = std::function<bool(const StateVec&)>;

// Zero-mean Gaussian vector with covariance equal to `corr` (factorized with
// jitter 1e-10, eigen fallback for boundary-PSD matrices).
StateVec sample_correlated(const CorrelationMatrix& corr, RngStream& rng);

// Reusable factorization for sampling loops.
class CorrelatedSampler {
public:
    explicit CorrelatedSampler(const CorrelationMatrix& corr);
    Eigen::VectorXd sample(RngStream& rng) const;
    int dim() const { return static_cast<int>(factor_.rows()); }

private:
    Eigen::MatrixXd factor_;
};

// One model step: mu + D * e with e ~ N(0, Gamma); the sampled next state has
// mean mu and covariance D * Gamma * D.
StateVec step_model(const models::DynamicsModel& model, const StateVec& s, ActionId a,
                    RngStream& rng);

struct RolloutReport {
    int truncated_branches = 0;
};

// Algorithm-1 style branched rollout. Rewards come from the supplied reward
// function; `terminal` (optional) ends a branch early. Branches truncate on
// non-finite states, counted in the report.
Dataset rollout(const models::DynamicsModel& model, const PolicyFn& policy,
                const std::vector<StateVec>& starts, const RolloutConfig& cfg,
                const RewardFn& reward, const TerminalFn& terminal, RngStream& rng,
                RolloutReport* report = nullptr);

}  // namespace inslab::rollout
