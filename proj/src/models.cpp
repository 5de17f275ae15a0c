#include "inslab/models.hpp"

#include "inslab/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace inslab::models {

namespace {

constexpr double kVarFloor = 1e-12;

}  // namespace

MeanPredictor MeanPredictor::linear(std::vector<Eigen::MatrixXd> weights) {
    if (weights.empty()) throw std::invalid_argument("MeanPredictor: no weights");
    MeanPredictor p;
    p.kind_ = MeanKind::linear_least_squares;
    p.n_actions_ = static_cast<int>(weights.size());
    p.dim_ = static_cast<int>(weights.front().rows());
    for (const auto& w : weights)
        if (w.rows() != p.dim_ || w.cols() != p.dim_ + 1)
            throw std::invalid_argument("MeanPredictor: weight shape must be dim x (dim+1)");
    p.weights_ = std::move(weights);
    return p;
}

MeanPredictor MeanPredictor::tabular(planning::Grid grid, int n_actions,
                                     std::vector<std::optional<StateVec>> cell_means) {
    if (cell_means.size() != static_cast<std::size_t>(grid.size()) * static_cast<std::size_t>(n_actions))
        throw std::invalid_argument("MeanPredictor: cell_means size mismatch");
    MeanPredictor p;
    p.kind_ = MeanKind::tabular_conditional;
    p.n_actions_ = n_actions;
    p.dim_ = grid.dims();
    p.grid_ = std::move(grid);
    p.cell_means_ = std::move(cell_means);
    return p;
}

StateVec MeanPredictor::predict(const StateVec& s, ActionId a) const {
    if (a < 0 || a >= n_actions_) throw std::invalid_argument("MeanPredictor: bad action");
    if (static_cast<int>(s.size()) != dim_)
        throw std::invalid_argument("MeanPredictor: state dimension mismatch");
    if (kind_ == MeanKind::linear_least_squares) {
        Eigen::VectorXd x(dim_ + 1);
        for (int i = 0; i < dim_; ++i) x[i] = s[static_cast<std::size_t>(i)];
        x[dim_] = 1.0;
        return from_eigen(weights_[static_cast<std::size_t>(a)] * x);
    }
    const int cell = grid_->index(s);
    const std::size_t slot = static_cast<std::size_t>(cell) * static_cast<std::size_t>(n_actions_) +
                             static_cast<std::size_t>(a);
    if (cell_means_[slot]) return *cell_means_[slot];
    // Nearest visited cell for this action (grid-coordinate distance).
    fallback_count_->fetch_add(1, std::memory_order_relaxed);
    const auto want = grid_->coords(cell);
    long best = -1;
    double best_d2 = 0.0;
    for (int c = 0; c < grid_->size(); ++c) {
        const std::size_t sl = static_cast<std::size_t>(c) * static_cast<std::size_t>(n_actions_) +
                               static_cast<std::size_t>(a);
        if (!cell_means_[sl]) continue;
        const auto have = grid_->coords(c);
        double d2 = 0.0;
        for (std::size_t d = 0; d < have.size(); ++d) {
            const double dd = static_cast<double>(have[d] - want[d]);
            d2 += dd * dd;
        }
        if (best < 0 || d2 < best_d2) {
            best = c;
            best_d2 = d2;
        }
    }
    if (best < 0) return s;  // nothing observed for this action: random-walk mean
    return *cell_means_[static_cast<std::size_t>(best) * static_cast<std::size_t>(n_actions_) +
                        static_cast<std::size_t>(a)];
}

std::vector<double> DynamicsModel::scales_at(const StateVec& s, const StateVec& mu) const {
    if (scale_kind == ScaleKind::homoscedastic) return scales;
    std::vector<double> out(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        out[i] = std::sqrt(std::max(prop_coef[i] * std::abs(mu[i] - s[i]), 0.0));
    return out;
}

DynamicsModel fit_model(const Dataset& ds, MeanKind kind, ModelMode mode,
                        const FitOptions& options) {
    if (ds.empty()) throw std::invalid_argument("fit_model: dataset is empty");
    const int dim = ds.state_dim();
    int n_actions = 0;
    for (const auto& r : ds.records()) n_actions = std::max(n_actions, r.action + 1);

    MeanPredictor mean = [&] {
        if (kind == MeanKind::linear_least_squares) {
            if (ds.size() < static_cast<std::size_t>(dim + 2))
                throw std::invalid_argument("fit_model: need at least dim+2 records");
            std::vector<Eigen::MatrixXd> weights;
            for (int a = 0; a < n_actions; ++a) {
                std::vector<const TransitionRecord*> recs;
                for (const auto& r : ds.records())
                    if (r.action == a) recs.push_back(&r);
                if (recs.empty()) {
                    // Unseen action: fall back to the random-walk map mu = s.
                    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim + 1);
                    w.leftCols(dim).setIdentity();
                    weights.push_back(std::move(w));
                    continue;
                }
                Eigen::MatrixXd X(recs.size(), dim + 1);
                Eigen::MatrixXd Y(recs.size(), dim);
                for (std::size_t r = 0; r < recs.size(); ++r) {
                    for (int d = 0; d < dim; ++d) {
                        X(static_cast<long>(r), d) = recs[r]->state[static_cast<std::size_t>(d)];
                        Y(static_cast<long>(r), d) = recs[r]->next_state[static_cast<std::size_t>(d)];
                    }
                    X(static_cast<long>(r), dim) = 1.0;
                }
                Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
                Eigen::MatrixXd wt;  // (dim+1) x dim
                if (qr.rank() == dim + 1 && recs.size() >= static_cast<std::size_t>(dim + 1)) {
                    wt = qr.solve(Y);
                } else {
                    // Rank-deficient design: ridge-regularized normal equations.
                    const Eigen::MatrixXd G =
                        X.transpose() * X +
                        options.ridge_lambda * Eigen::MatrixXd::Identity(dim + 1, dim + 1);
                    wt = G.ldlt().solve(X.transpose() * Y);
                }
                weights.push_back(wt.transpose());
            }
            return MeanPredictor::linear(std::move(weights));
        }
        if (!options.tabular_grid)
            throw std::invalid_argument("fit_model: tabular kind requires a grid");
        const planning::Grid& grid = *options.tabular_grid;
        if (grid.dims() != dim) throw std::invalid_argument("fit_model: grid dim mismatch");
        std::vector<StateVec> sums(static_cast<std::size_t>(grid.size()) *
                                       static_cast<std::size_t>(n_actions),
                                   StateVec(static_cast<std::size_t>(dim), 0.0));
        std::vector<int> counts(sums.size(), 0);
        for (const auto& r : ds.records()) {
            const std::size_t slot =
                static_cast<std::size_t>(grid.index(r.state)) * static_cast<std::size_t>(n_actions) +
                static_cast<std::size_t>(r.action);
            for (int d = 0; d < dim; ++d) sums[slot][static_cast<std::size_t>(d)] += r.next_state[static_cast<std::size_t>(d)];
            ++counts[slot];
        }
        std::vector<std::optional<StateVec>> means(sums.size());
        for (std::size_t i = 0; i < sums.size(); ++i) {
            if (counts[i] == 0) continue;
            StateVec m = sums[i];
            for (auto& v : m) v /= counts[i];
            means[i] = std::move(m);
        }
        return MeanPredictor::tabular(grid, n_actions, std::move(means));
    }();

    // Residual scales (and the displacement-proportional law if selected).
    std::vector<double> sq(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> disp(static_cast<std::size_t>(dim), 0.0);
    for (const auto& r : ds.records()) {
        const StateVec mu = mean.predict(r.state, r.action);
        for (int d = 0; d < dim; ++d) {
            const std::size_t ud = static_cast<std::size_t>(d);
            const double e = r.next_state[ud] - mu[ud];
            sq[ud] += e * e;
            disp[ud] += std::abs(mu[ud] - r.state[ud]);
        }
    }
    DynamicsModel model{.mean = std::move(mean),
                        .mode = mode,
                        .scale_kind = options.scale_kind,
                        .scales = {},
                        .prop_coef = {},
                        .corr = CorrelationMatrix::identity(dim)};
    const double n = static_cast<double>(ds.size());
    for (int d = 0; d < dim; ++d) {
        const std::size_t ud = static_cast<std::size_t>(d);
        model.scales.push_back(std::sqrt(sq[ud] / n));
        model.prop_coef.push_back(disp[ud] > 0.0 ? sq[ud] / disp[ud] : 0.0);
    }
    return model;
}

GaussianPrediction predict(const DynamicsModel& model, const StateVec& s, ActionId a) {
    StateVec mu = model.mean.predict(s, a);
    std::vector<double> scales = model.scales_at(s, mu);
    CorrelationMatrix corr = model.mode == ModelMode::lagged
                                 ? CorrelationMatrix::identity(model.state_dim())
                                 : model.corr;
    return GaussianPrediction{std::move(mu), std::move(scales), std::move(corr)};
}

ResidualWindow::ResidualWindow(int capacity, int dim) : capacity_(capacity), dim_(dim) {
    if (capacity < 1) throw std::invalid_argument("ResidualWindow: capacity must be >= 1");
    if (dim < 1) throw std::invalid_argument("ResidualWindow: dim must be >= 1");
}

void ResidualWindow::push(const StateVec& residual) {
    if (static_cast<int>(residual.size()) != dim_)
        throw std::invalid_argument("ResidualWindow::push: dimension mismatch");
    buf_.push_back(residual);
    if (static_cast<int>(buf_.size()) > capacity_) buf_.pop_front();
}

CorrelationMatrix update_corr(const ResidualWindow& window, const CorrelationMatrix& current,
                              double shrink) {
    if (shrink < 0.0 || shrink > 1.0)
        throw std::invalid_argument("update_corr: shrink outside [0,1]");
    const int dim = window.dim();
    const int n = window.size();
    if (n < 2 * dim) return current;

    // Column-major copies so the Gram products are contiguous dots.
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(dim),
                                          std::vector<double>(static_cast<std::size_t>(n)));
    {
        int t = 0;
        for (const auto& e : window.entries()) {
            for (int d = 0; d < dim; ++d)
                cols[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)] =
                    e[static_cast<std::size_t>(d)];
            ++t;
        }
    }
    std::vector<double> mean(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        auto& c = cols[static_cast<std::size_t>(d)];
        const double m = kernels::sum(c.data(), c.size()) / n;
        mean[static_cast<std::size_t>(d)] = m;
        for (auto& v : c) v -= m;
    }
    Eigen::MatrixXd cov(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const double cij = kernels::dot(cols[static_cast<std::size_t>(i)].data(),
                                            cols[static_cast<std::size_t>(j)].data(),
                                            static_cast<std::size_t>(n)) /
                               n;
            cov(i, j) = cij;
            cov(j, i) = cij;
        }
    Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (cov(i, i) <= kVarFloor) continue;  // zero-variance row stays identity
        for (int j = 0; j < dim; ++j) {
            if (i == j || cov(j, j) <= kVarFloor) continue;
            corr(i, j) = std::clamp(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j)), -1.0, 1.0);
        }
    }
    Eigen::MatrixXd shrunk =
        (1.0 - shrink) * corr + shrink * Eigen::MatrixXd::Identity(dim, dim);
    shrunk.diagonal().setOnes();
    return CorrelationMatrix::from_entries(shrunk);
}

namespace {

struct GammaFactor {
    Eigen::MatrixXd inv;
    double log_det = 0.0;
    bool floored = false;
};

GammaFactor factor_gamma(const CorrelationMatrix& corr) {
    GammaFactor f;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr.entries());
    Eigen::VectorXd ev = es.eigenvalues();
    for (long i = 0; i < ev.size(); ++i) {
        if (ev[i] < kVarFloor) {
            ev[i] = kVarFloor;
            f.floored = true;
        }
        f.log_det += std::log(ev[i]);
    }
    f.inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return f;
}

double loss_with_factor(const GammaFactor& gf, const GaussianPrediction& pred,
                        const StateVec& x, bool* floored) {
    const int n = pred.dim();
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("likelihood_loss: dimension mismatch");
    bool fl = gf.floored;
    double log_det_scales = 0.0;
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) {
        double s = pred.scales[static_cast<std::size_t>(i)];
        if (s * s < kVarFloor) {
            s = std::sqrt(kVarFloor);
            fl = true;
        }
        log_det_scales += 2.0 * std::log(s);
        z[i] = (x[static_cast<std::size_t>(i)] - pred.mean[static_cast<std::size_t>(i)]) / s;
    }
    if (floored) *floored = fl;
    const double quad = z.dot(gf.inv * z);
    return gf.log_det + log_det_scales + quad + n * std::log(2.0 * std::numbers::pi);
}

}  // namespace

double likelihood_loss(const GaussianPrediction& pred, const StateVec& x, bool* floored) {
    return loss_with_factor(factor_gamma(pred.corr), pred, x, floored);
}

double mean_likelihood_loss(const DynamicsModel& model, const Dataset& ds) {
    if (ds.empty()) throw std::invalid_argument("mean_likelihood_loss: empty dataset");
    const CorrelationMatrix corr = model.mode == ModelMode::lagged
                                       ? CorrelationMatrix::identity(model.state_dim())
                                       : model.corr;
    const GammaFactor gf = factor_gamma(corr);
    double acc = 0.0;
    for (const auto& r : ds.records()) {
        StateVec mu = model.mean.predict(r.state, r.action);
        GaussianPrediction pred{mu, model.scales_at(r.state, mu), corr};
        acc += loss_with_factor(gf, pred, r.next_state, nullptr);
    }
    return acc / static_cast<double>(ds.size());
}

std::vector<double> marginal_likelihood_losses(const DynamicsModel& model, const Dataset& ds) {
    if (ds.empty()) throw std::invalid_argument("marginal_likelihood_losses: empty dataset");
    const int dim = model.state_dim();
    std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
    for (const auto& r : ds.records()) {
        const StateVec mu = model.mean.predict(r.state, r.action);
        const auto scales = model.scales_at(r.state, mu);
        for (int d = 0; d < dim; ++d) {
            const std::size_t ud = static_cast<std::size_t>(d);
            const double var = std::max(scales[ud] * scales[ud], kVarFloor);
            const double e = r.next_state[ud] - mu[ud];
            acc[ud] += std::log(var) + e * e / var + std::log(2.0 * std::numbers::pi);
        }
    }
    for (auto& v : acc) v /= static_cast<double>(ds.size());
    return acc;
}

nlohmann::json model_to_json(const DynamicsModel& model) {
    nlohmann::json j;
    j["mode"] = model.mode == ModelMode::lagged ? "lagged" : "instantaneous";
    j["scale_kind"] =
        model.scale_kind == ScaleKind::homoscedastic ? "homoscedastic" : "state_proportional";
    j["scales"] = model.scales;
    j["prop_coef"] = model.prop_coef;
    std::vector<std::vector<double>> corr;
    for (int i = 0; i < model.corr.dim(); ++i) {
        std::vector<double> row;
        for (int jj = 0; jj < model.corr.dim(); ++jj) row.push_back(model.corr(i, jj));
        corr.push_back(std::move(row));
    }
    j["corr"] = corr;
    const auto& mean = model.mean;
    if (mean.kind() == MeanKind::linear_least_squares) {
        j["mean"]["kind"] = "linear_least_squares";
        std::vector<std::vector<std::vector<double>>> ws;
        for (const auto& w : mean.weights()) {
            std::vector<std::vector<double>> m;
            for (long r = 0; r < w.rows(); ++r)
                m.emplace_back(w.row(r).begin(), w.row(r).end());
            ws.push_back(std::move(m));
        }
        j["mean"]["weights"] = ws;
    } else {
        j["mean"]["kind"] = "tabular_conditional";
        const auto& grid = *mean.grid();
        std::vector<std::vector<double>> dims;
        for (int d = 0; d < grid.dims(); ++d)
            dims.push_back({grid.dim(d).lo, grid.dim(d).hi, static_cast<double>(grid.dim(d).n_cells)});
        j["mean"]["grid"] = dims;
        j["mean"]["n_actions"] = mean.n_actions();
        nlohmann::json cells = nlohmann::json::array();
        for (std::size_t i = 0; i < mean.cell_means().size(); ++i) {
            if (!mean.cell_means()[i]) continue;
            cells.push_back({{"slot", i}, {"mean", *mean.cell_means()[i]}});
        }
        j["mean"]["cells"] = cells;
    }
    return j;
}

DynamicsModel model_from_json(const nlohmann::json& j) {
    const std::string mode = j.at("mode");
    const std::string sk = j.at("scale_kind");
    MeanPredictor mean = [&] {
        const auto& jm = j.at("mean");
        if (jm.at("kind") == "linear_least_squares") {
            std::vector<Eigen::MatrixXd> ws;
            for (const auto& m : jm.at("weights")) {
                const auto rows = m.size();
                const auto cols = m.at(0).size();
                Eigen::MatrixXd w(rows, cols);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) w(static_cast<long>(r), static_cast<long>(c)) = m.at(r).at(c);
                ws.push_back(std::move(w));
            }
            return MeanPredictor::linear(std::move(ws));
        }
        std::vector<planning::GridDim> dims;
        for (const auto& d : jm.at("grid"))
            dims.push_back({d.at(0), d.at(1), static_cast<int>(d.at(2).get<double>())});
        planning::Grid grid(dims);
        const int n_actions = jm.at("n_actions");
        std::vector<std::optional<StateVec>> cells(
            static_cast<std::size_t>(grid.size()) * static_cast<std::size_t>(n_actions));
        for (const auto& c : jm.at("cells"))
            cells[c.at("slot").get<std::size_t>()] = c.at("mean").get<StateVec>();
        return MeanPredictor::tabular(std::move(grid), n_actions, std::move(cells));
    }();
    Eigen::MatrixXd corr(j.at("corr").size(), j.at("corr").size());
    for (std::size_t i = 0; i < j.at("corr").size(); ++i)
        for (std::size_t c = 0; c < j.at("corr").size(); ++c)
            corr(static_cast<long>(i), static_cast<long>(c)) = j.at("corr").at(i).at(c);
    return DynamicsModel{.mean = std::move(mean),
                         .mode = mode == "lagged" ? ModelMode::lagged : ModelMode::instantaneous,
                         .scale_kind = sk == "homoscedastic" ? ScaleKind::homoscedastic
                                                             : ScaleKind::state_proportional,
                         .scales = j.at("scales").get<std::vector<double>>(),
                         .prop_coef = j.at("prop_coef").get<std::vector<double>>(),
                         .corr = CorrelationMatrix::from_entries(corr)};
}

}  // namespace inslab::models
