#include "inslab/planning/train_loop.hpp"

#include "inslab/planning/planner.hpp"

#include "inslab/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inslab::planning {

namespace {

struct QLearner {
    const Grid& grid;
    int n_actions;
    std::vector<double> q;
    double lr;

    QLearner(const Grid& g, int a, double learning_rate)
        : grid(g),
          n_actions(a),
          q(static_cast<std::size_t>(g.size()) * static_cast<std::size_t>(a), 0.0),
          lr(learning_rate) {}

    std::size_t slot(int cell, int a) const {
        return static_cast<std::size_t>(cell) * static_cast<std::size_t>(n_actions) +
               static_cast<std::size_t>(a);
    }

    int greedy(int cell) const {
        int best = 0;
        double best_q = q[slot(cell, 0)];
        for (int a = 1; a < n_actions; ++a)
            if (q[slot(cell, a)] > best_q) {
                best_q = q[slot(cell, a)];
                best = a;
            }
        return best;
    }

    ActionId act(const StateVec& s, double eps, RngStream& rng) const {
        if (rng.uniform() < eps)
            return static_cast<ActionId>(rng.uniform_int(static_cast<std::uint32_t>(n_actions)));
        return greedy(grid.index(s));
    }

    void update(const TransitionRecord& rec, double gamma) {
        const int cell = grid.index(rec.state);
        const int next_cell = grid.index(rec.next_state);
        const double target =
            rec.reward + (rec.terminal ? 0.0 : gamma * q[slot(next_cell, greedy(next_cell))]);
        auto& cur = q[slot(cell, rec.action)];
        cur += lr * (target - cur);
    }
};

}  // namespace

TrainResult train_loop(const envs::Env& env, const TrainLoopConfig& cfg, RngStream& rng) {
    if (cfg.epochs < 1 || cfg.env_steps < 1 || cfg.model_rollouts < 0 || cfg.grad_updates < 0)
        throw std::invalid_argument("train_loop: loop sizes must be >= 1 (rollouts/updates >= 0)");
    if (cfg.mean_kind == models::MeanKind::tabular_conditional && !cfg.model_grid)
        throw std::invalid_argument("train_loop: tabular mean requires model_grid");

    const int dim = env.state_dim();
    const double gamma = env.discount();
    const int min_fit = cfg.min_fit_records > 0 ? cfg.min_fit_records : dim + 2;

    Dataset d_env(Dataset::Provenance::environment, cfg.denv_capacity);
    Dataset d_model(Dataset::Provenance::model, cfg.dmodel_capacity);
    QLearner learner(cfg.policy_grid, env.n_actions(), cfg.q_learning_rate);
    models::ResidualWindow window(cfg.corr_window, dim);
    CorrelationMatrix gamma_corr = CorrelationMatrix::identity(dim);
    std::optional<models::DynamicsModel> model;

    RngStream env_rng = rng.split("env");
    StateVec s = env.initial_state(env_rng);
    int episode_steps = 0;
    double eps = cfg.eps0;

    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Refit on the environment dataset; Gamma carries over.
        if (static_cast<int>(d_env.size()) >= min_fit) {
            models::FitOptions fopts;
            fopts.scale_kind = cfg.scale_kind;
            fopts.tabular_grid = cfg.model_grid;
            model = models::fit_model(d_env, cfg.mean_kind, cfg.mode, fopts);
            if (cfg.mode == models::ModelMode::instantaneous) model->corr = gamma_corr;
        }

        for (int t = 0; t < cfg.env_steps; ++t) {
            const ActionId a = learner.act(s, eps, env_rng);
            const auto res = env.step(s, a, env_rng);
            d_env.push(TransitionRecord{s, a, res.next, res.reward, res.terminal});

            if (model && cfg.mode == models::ModelMode::instantaneous) {
                const GaussianPrediction pred = models::predict(*model, s, a);
                StateVec e(static_cast<std::size_t>(dim));
                for (int d = 0; d < dim; ++d) {
                    const std::size_t ud = static_cast<std::size_t>(d);
                    const double scale = std::max(pred.scales[ud], 1e-9);
                    e[ud] = (res.next[ud] - pred.mean[ud]) / scale;
                }
                window.push(e);
                if ((t + 1) % cfg.corr_update_every == 0) {
                    gamma_corr = models::update_corr(window, gamma_corr, cfg.corr_shrink);
                    model->corr = gamma_corr;
                }
            }

            ++episode_steps;
            if (res.terminal || episode_steps >= env.max_steps()) {
                s = env.initial_state(env_rng);
                episode_steps = 0;
            } else {
                s = res.next;
            }
        }

        if (model && cfg.model_rollouts > 0) {
            std::vector<StateVec> starts;
            RngStream start_rng = rng.split("starts").split(static_cast<std::uint64_t>(epoch));
            for (int m = 0; m < cfg.model_rollouts; ++m)
                starts.push_back(
                    d_env[start_rng.uniform_int(static_cast<std::uint32_t>(d_env.size()))].state);
            rollout::RolloutConfig rc;
            rc.k = cfg.rollout_k;
            rc.branch = 1;
            RngStream roll_rng = rng.split("rollout").split(static_cast<std::uint64_t>(epoch));
            const Dataset rolled = rollout::rollout(
                *model,
                [&](const StateVec& state, RngStream& r) { return learner.act(state, eps, r); },
                starts, rc,
                [&](const StateVec& state, ActionId action, const StateVec& next) {
                    return env.reward(state, action, next);
                },
                [&](const StateVec& next) { return env.terminal_state(next); }, roll_rng);
            for (const auto& rec : rolled.records()) d_model.push(rec);
        }

        if (!d_model.empty()) {
            RngStream upd_rng = rng.split("updates").split(static_cast<std::uint64_t>(epoch));
            for (int g = 0; g < cfg.grad_updates; ++g) {
                const auto& rec =
                    d_model[upd_rng.uniform_int(static_cast<std::uint32_t>(d_model.size()))];
                learner.update(rec, gamma);
            }
        }

        eps = std::max(cfg.eps_floor, eps * cfg.eps_decay);

        EpochLog log;
        log.epoch = epoch;
        TabularPolicy greedy(static_cast<std::size_t>(cfg.policy_grid.size()), 0);
        for (int c = 0; c < cfg.policy_grid.size(); ++c) greedy[static_cast<std::size_t>(c)] = learner.greedy(c);
        RngStream eval_rng = rng.split("eval").split(static_cast<std::uint64_t>(epoch));
        std::tie(log.return_mean, log.return_std) =
            policy_return(env, greedy, cfg.policy_grid, cfg.eval_episodes, gamma, eval_rng);
        if (model) {
            Dataset recent(Dataset::Provenance::environment);
            const std::size_t take =
                std::min<std::size_t>(d_env.size(), static_cast<std::size_t>(cfg.likelihood_window));
            for (std::size_t i = d_env.size() - take; i < d_env.size(); ++i) recent.push(d_env[i]);
            log.likelihood = models::mean_likelihood_loss(*model, recent);
        }
        log.corr = cfg.mode == models::ModelMode::instantaneous
                       ? gamma_corr.entries()
                       : Eigen::MatrixXd::Identity(dim, dim);
        result.curve.push_back(std::move(log));
    }

    result.q = QTable{env.n_actions(), learner.q};
    result.greedy_policy.assign(static_cast<std::size_t>(cfg.policy_grid.size()), 0);
    for (int c = 0; c < cfg.policy_grid.size(); ++c)
        result.greedy_policy[static_cast<std::size_t>(c)] = learner.greedy(c);
    result.final_model = std::move(model);
    result.env_data = std::move(d_env);
    return result;
}

}  // namespace inslab::planning
