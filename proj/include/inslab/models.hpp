#pragma once

#include "inslab/planning/grid.hpp"
#include "inslab/rng.hpp"
#include "inslab/types.hpp"

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <atomic>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace inslab::models {

enum class MeanKind { linear_least_squares, tabular_conditional };
enum class ModelMode { lagged, instantaneous };
enum class ScaleKind { homoscedastic, state_proportional };

// Conditional-mean predictor for the next state. Linear kind fits one affine
// map per action; tabular kind stores per-cell conditional means on a grid
// with nearest-visited-cell fallback.
class MeanPredictor {
public:
    static MeanPredictor linear(std::vector<Eigen::MatrixXd> weights);
    static MeanPredictor tabular(planning::Grid grid, int n_actions,
                                 std::vector<std::optional<StateVec>> cell_means);

    StateVec predict(const StateVec& s, ActionId a) const;
    MeanKind kind() const { return kind_; }
    int state_dim() const { return dim_; }
    int n_actions() const { return n_actions_; }
    std::uint64_t fallback_count() const { return fallback_count_->load(); }

    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::optional<planning::Grid>& grid() const { return grid_; }
    const std::vector<std::optional<StateVec>>& cell_means() const { return cell_means_; }

private:
    MeanPredictor() = default;

    MeanKind kind_ = MeanKind::linear_least_squares;
    int dim_ = 0;
    int n_actions_ = 0;
    std::vector<Eigen::MatrixXd> weights_;  // per action, dim x (dim+1)
    std::optional<planning::Grid> grid_;
    std::vector<std::optional<StateVec>> cell_means_;  // [cell * n_actions + a]
    std::shared_ptr<std::atomic<std::uint64_t>> fallback_count_ =
        std::make_shared<std::atomic<std::uint64_t>>(0);
};

// One-step dynamics model: conditional mean, per-dimension residual scales
// (homoscedastic vector or displacement-proportional law) and correlation
// Gamma. Lagged mode keeps Gamma at the identity.
struct DynamicsModel {
    MeanPredictor mean;
    ModelMode mode = ModelMode::lagged;
    ScaleKind scale_kind = ScaleKind::homoscedastic;
    std::vector<double> scales;      // homoscedastic per-dimension std
    std::vector<double> prop_coef;   // Var_i = prop_coef_i * |mu_i - s_i|
    CorrelationMatrix corr = CorrelationMatrix::identity(1);

    int state_dim() const { return mean.state_dim(); }
    std::vector<double> scales_at(const StateVec& s, const StateVec& mu) const;
};

struct FitOptions {
    ScaleKind scale_kind = ScaleKind::homoscedastic;
    std::optional<planning::Grid> tabular_grid;  // required for tabular kind
    double ridge_lambda = 1e-8;                  // rank-deficiency fallback
};

// Maximum-likelihood fit on the dataset: least-squares conditional mean,
// residual-std scales, identity correlation.
DynamicsModel fit_model(const Dataset& ds, MeanKind kind, ModelMode mode,
                        const FitOptions& options = {});

GaussianPrediction predict(const DynamicsModel& model, const StateVec& s, ActionId a);

// FIFO of standardized prediction-error vectors.
class ResidualWindow {
public:
    explicit ResidualWindow(int capacity, int dim);

    void push(const StateVec& residual);
    int size() const { return static_cast<int>(buf_.size()); }
    int capacity() const { return capacity_; }
    int dim() const { return dim_; }
    const std::deque<StateVec>& entries() const { return buf_; }

private:
    int capacity_;
    int dim_;
    std::deque<StateVec> buf_;
};

// Pearson correlation of the window, shrunk toward the identity:
// (1-shrink) * Gamma_emp + shrink * I, PSD-repaired, unit diagonal.
// Zero-variance dimensions get identity rows. Windows smaller than 2*dim
// return `current` unchanged.
CorrelationMatrix update_corr(const ResidualWindow& window, const CorrelationMatrix& current,
                              double shrink);

// -2 log N(x; mu, D Gamma D): log|Sigma| + (x-mu)^T Sigma^-1 (x-mu) + n log 2pi.
// Variances are floored at 1e-12 when degenerate; `floored` reports it.
double likelihood_loss(const GaussianPrediction& pred, const StateVec& x,
                       bool* floored = nullptr);

// Mean likelihood loss of the model over a dataset (factorizes Gamma once).
double mean_likelihood_loss(const DynamicsModel& model, const Dataset& ds);

// Per-dimension marginal losses log s_i^2 + (x_i-mu_i)^2/s_i^2 + log 2pi,
// averaged over the dataset.
std::vector<double> marginal_likelihood_losses(const DynamicsModel& model, const Dataset& ds);

nlohmann::json model_to_json(const DynamicsModel& model);
DynamicsModel model_from_json(const nlohmann::json& j);

}  // namespace inslab::models
