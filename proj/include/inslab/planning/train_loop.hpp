#pragma once

#include "inslab/envs/env.hpp"
#include "inslab/models.hpp"
#include "inslab/planning/grid.hpp"
#include "inslab/planning/tabular_mdp.hpp"

#include <optional>
#include <vector>

namespace inslab::planning {

// Dyna-style loop: N epochs of {refit model on D_env; E env steps with an
// eps-greedy tabular Q policy, pushing standardized residuals into the
// correlation window; M k-step model rollouts into D_model; G Q-learning
// updates on D_model}. Gamma persists across refits in instantaneous mode and
// stays the identity in lagged mode.
struct TrainLoopConfig {
    explicit TrainLoopConfig(Grid policy) : policy_grid(std::move(policy)) {}

    int epochs = 20;         // N
    int env_steps = 400;     // E
    int model_rollouts = 100;  // M
    int grad_updates = 2000;   // G
    int rollout_k = 5;

    models::MeanKind mean_kind = models::MeanKind::tabular_conditional;
    models::ModelMode mode = models::ModelMode::instantaneous;
    models::ScaleKind scale_kind = models::ScaleKind::homoscedastic;
    std::optional<Grid> model_grid;  // for the tabular mean
    Grid policy_grid;    // tabular Q policy support

    int corr_window = 2000;
    double corr_shrink = 0.05;
    int corr_update_every = 1;

    double q_learning_rate = 0.1;
    double eps0 = 0.5;
    double eps_decay = 0.99;
    double eps_floor = 0.05;

    std::size_t denv_capacity = 0;        // unbounded
    std::size_t dmodel_capacity = 50000;  // FIFO
    int min_fit_records = 0;              // 0: dim + 2

    int eval_episodes = 10;
    int likelihood_window = 2000;  // most recent env records scored per epoch
};

struct EpochLog {
    int epoch = 0;
    double return_mean = 0.0;
    double return_std = 0.0;
    double likelihood = 0.0;      // mean loss of the current model, recent env data
    Eigen::MatrixXd corr;         // Gamma at epoch end
};

struct TrainResult {
    QTable q;
    TabularPolicy greedy_policy;
    std::vector<EpochLog> curve;
    std::optional<models::DynamicsModel> final_model;
    Dataset env_data{Dataset::Provenance::environment};
};

TrainResult train_loop(const envs::Env& env, const TrainLoopConfig& cfg, RngStream& rng);

}  // namespace inslab::planning
