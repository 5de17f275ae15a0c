#include "inslab/rollout.hpp"

#include "inslab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace inslab::rollout {

CorrelatedSampler::CorrelatedSampler(const CorrelationMatrix& corr)
    : factor_(psd_factor(corr.entries())) {}

Eigen::VectorXd CorrelatedSampler::sample(RngStream& rng) const {
    return factor_ * standard_normal(dim(), rng);
}

StateVec sample_correlated(const CorrelationMatrix& corr, RngStream& rng) {
    return from_eigen(CorrelatedSampler(corr).sample(rng));
}

StateVec step_model(const models::DynamicsModel& model, const StateVec& s, ActionId a,
                    RngStream& rng) {
    const GaussianPrediction pred = models::predict(model, s, a);
    const Eigen::VectorXd e = CorrelatedSampler(pred.corr).sample(rng);
    StateVec out = pred.mean;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += pred.scales[i] * e[static_cast<long>(i)];
    return out;
}

Dataset rollout(const models::DynamicsModel& model, const PolicyFn& policy,
                const std::vector<StateVec>& starts, const RolloutConfig& cfg,
                const RewardFn& reward, const TerminalFn& terminal, RngStream& rng,
                RolloutReport* report) {
    if (starts.empty()) throw std::invalid_argument("rollout: no start states");
    if (cfg.k < 1) throw std::invalid_argument("rollout: k must be >= 1");
    if (cfg.branch < 1) throw std::invalid_argument("rollout: branch must be >= 1");

    Dataset ds(Dataset::Provenance::model);
    for (std::size_t si = 0; si < starts.size(); ++si) {
        for (int b = 0; b < cfg.branch; ++b) {
            RngStream branch_rng =
                rng.split(static_cast<std::uint64_t>(si) * static_cast<std::uint64_t>(cfg.branch) +
                          static_cast<std::uint64_t>(b));
            StateVec s = starts[si];
            for (int t = 0; t < cfg.k; ++t) {
                const ActionId a = policy(s, branch_rng);
                StateVec next = step_model(model, s, a, branch_rng);
                if (!all_finite(next)) {
                    if (report) ++report->truncated_branches;
                    break;
                }
                const bool done = terminal && terminal(next);
                ds.push(TransitionRecord{s, a, next, reward(s, a, next), done});
                if (done) break;
                s = std::move(next);
            }
        }
    }
    return ds;
}

}  // namespace inslab::rollout
