#include "inslab/theorylab/checks.hpp"

#include "inslab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace inslab::theorylab {

McEstimate mc_integral_gap(const SamplerFn& p_sampler, const SamplerFn& phat_sampler,
                           const TestFn& f, int n_mc, RngStream& rng) {
    if (n_mc < 2) throw std::invalid_argument("mc_integral_gap: n_mc must be >= 2");
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n_mc; ++i) {
        // Common random numbers: both samplers consume identical streams.
        RngStream child = rng.split(static_cast<std::uint64_t>(i));
        RngStream child_copy = child;
        const double d = f(p_sampler(child)) - f(phat_sampler(child_copy));
        sum += d;
        sumsq += d * d;
    }
    const double n = static_cast<double>(n_mc);
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    return McEstimate{mean, std::sqrt(var / n)};
}

GaussianPair GaussianPair::from_true(Eigen::VectorXd mu, Eigen::MatrixXd cov) {
    GaussianPair p;
    p.mu = std::move(mu);
    p.cov_true = std::move(cov);
    p.cov_lagged = p.cov_true.diagonal().asDiagonal();
    return p;
}

SamplerFn GaussianPair::sampler_true() const {
    const Eigen::MatrixXd L = psd_factor(cov_true);
    const Eigen::VectorXd mean = mu;
    return [L, mean](RngStream& rng) {
        return Eigen::VectorXd(mean + L * standard_normal(static_cast<int>(mean.size()), rng));
    };
}

SamplerFn GaussianPair::sampler_lagged() const {
    const Eigen::MatrixXd L = psd_factor(cov_lagged);
    const Eigen::VectorXd mean = mu;
    return [L, mean](RngStream& rng) {
        return Eigen::VectorXd(mean + L * standard_normal(static_cast<int>(mean.size()), rng));
    };
}

GvCheckResult theorem_gv_check(const GaussianPair& pair, const QuadraticFunction& f,
                               const DepStructure& dep, int n_mc, RngStream& rng) {
    const GDecomposition decomp = g_decompose(f, dep);
    const QuadraticFunction g = decomp.g_function();

    GvCheckResult out;
    RngStream lhs_rng = rng.split("lhs");
    RngStream rhs_rng = rng.split("lhs");  // same stream: identical samples for F and G_F
    out.lhs = mc_integral_gap(
        pair.sampler_true(), pair.sampler_lagged(),
        [&f](const Eigen::VectorXd& s) { return f(s); }, n_mc, lhs_rng);
    out.rhs = mc_integral_gap(
        pair.sampler_true(), pair.sampler_lagged(),
        [&g](const Eigen::VectorXd& s) { return g(s); }, n_mc, rhs_rng);

    out.lhs_closed = gaussian_expectation(f, pair.mu, pair.cov_true) -
                     gaussian_expectation(f, pair.mu, pair.cov_lagged);
    out.rhs_closed = gaussian_expectation(g, pair.mu, pair.cov_true) -
                     gaussian_expectation(g, pair.mu, pair.cov_lagged);

    const double combined =
        std::sqrt(out.lhs.std_err * out.lhs.std_err + out.rhs.std_err * out.rhs.std_err);
    out.mc_agree = std::abs(out.lhs.estimate - out.rhs.estimate) < 4.0 * std::max(combined, 1e-12);
    out.closed_agree = std::abs(out.lhs_closed - out.rhs_closed) < 1e-9;
    return out;
}

AlphaBeta alpha_beta(const planning::TabularMDP& mdp_true,
                     const planning::TabularMDP& mdp_lagged, int s, int a0, int a1) {
    const auto vi_true = planning::value_iteration(mdp_true, {.tol = 1e-12, .max_iterations = 1000000});
    const auto vi_lag = planning::value_iteration(mdp_lagged, {.tol = 1e-12, .max_iterations = 1000000});
    AlphaBeta ab;
    ab.alpha = vi_true.q.at(s, a0) - vi_true.q.at(s, a1);
    ab.beta = (vi_lag.q.at(s, a0) - vi_lag.q.at(s, a1)) - ab.alpha;
    return ab;
}

namespace {

// f(s_i) as a vector over all states; one-step MDPs evaluate the function on
// the outcome block via the grid coordinates.
std::vector<double> coordinate_function(const planning::TabularMDP& mdp,
                                        const planning::Grid& grid, int dim, double slope,
                                        double intercept) {
    const int offset = mdp.next_offset();
    std::vector<double> f(static_cast<std::size_t>(mdp.n_states()), 0.0);
    for (int s = 0; s < mdp.n_states(); ++s) {
        const int cell = offset > 0 && s >= offset ? s - offset : s;
        if (cell >= grid.size()) continue;
        const auto coords = grid.coords(cell);
        f[static_cast<std::size_t>(s)] =
            slope * grid.center_of(dim, coords[static_cast<std::size_t>(dim)]) + intercept;
    }
    return f;
}

std::vector<double> indicator_function(const planning::TabularMDP& mdp,
                                       const planning::Grid& grid, int dim, int cell_value) {
    const int offset = mdp.next_offset();
    std::vector<double> f(static_cast<std::size_t>(mdp.n_states()), 0.0);
    for (int s = 0; s < mdp.n_states(); ++s) {
        const int cell = offset > 0 && s >= offset ? s - offset : s;
        if (cell >= grid.size()) continue;
        const auto coords = grid.coords(cell);
        if (coords[static_cast<std::size_t>(dim)] == cell_value)
            f[static_cast<std::size_t>(s)] = 1.0;
    }
    return f;
}

std::vector<double> combine(const std::vector<double>& a, double sa,
                            const std::vector<double>& b, double sb) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = sa * a[i] + sb * b[i];
    return out;
}

double action_gap(const planning::TabularMDP& mdp, int s, int a0, int a1,
                  const std::vector<double>& f) {
    return planning::row_expectation(mdp.row(s, a0), f.data()) -
           planning::row_expectation(mdp.row(s, a1), f.data());
}

}  // namespace

BetaSymmetryResult beta_symmetry_check(const planning::TabularMDP& mdp_true,
                                       const planning::TabularMDP& mdp_lagged,
                                       const planning::Grid& grid, int s, int a0, int a1,
                                       int n_random_f, RngStream& rng) {
    if (!mdp_true.next_state_reward())
        throw std::invalid_argument("beta_symmetry_check: MDP lacks a next-state reward");
    const std::vector<double>& r = *mdp_true.next_state_reward();

    BetaSymmetryResult out;
    const AlphaBeta base = alpha_beta(mdp_true, mdp_lagged, s, a0, a1);

    std::vector<double> neg(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
    const AlphaBeta negated = alpha_beta(with_next_state_reward(mdp_true, neg),
                                         with_next_state_reward(mdp_lagged, neg), s, a0, a1);
    out.negation_ok = negated.beta == -base.beta;

    out.invariance_ok = true;
    for (int q = 0; q < n_random_f; ++q) {
        const int dim = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(grid.dims())));
        const double slope = rng.uniform(-10.0, 10.0);
        const double intercept = rng.uniform(-5.0, 5.0);
        const auto f = coordinate_function(mdp_true, grid, dim, slope, intercept);
        const auto shifted = combine(r, 1.0, f, 1.0);
        const AlphaBeta ab = alpha_beta(with_next_state_reward(mdp_true, shifted),
                                        with_next_state_reward(mdp_lagged, shifted), s, a0, a1);
        const double err = std::abs(ab.beta - base.beta);
        out.max_invariance_err = std::max(out.max_invariance_err, err);
        if (err > 1e-12) out.invariance_ok = false;
    }
    return out;
}

DrReward construct_dr_reward(const planning::TabularMDP& mdp_true,
                             const planning::TabularMDP& mdp_lagged,
                             const planning::Grid& grid, int s, int a0, int a1,
                             const std::vector<double>& r0_next) {
    const auto ab_of = [&](const std::vector<double>& r) {
        return alpha_beta(with_next_state_reward(mdp_true, r),
                          with_next_state_reward(mdp_lagged, r), s, a0, a1);
    };

    AlphaBeta ab0 = ab_of(r0_next);
    if (std::abs(ab0.beta) < 1e-12)
        throw std::runtime_error("construct_dr_reward: no instantaneous dependence detected "
                                 "(beta(R0) = 0)");
    // Normalize so beta < 0 (membership needs -beta > 0).
    std::vector<double> r_base = r0_next;
    if (ab0.beta > 0.0) {
        for (auto& v : r_base) v = -v;
        ab0 = ab_of(r_base);
    }

    // Find an f with K != 0: coordinate projections, then cell indicators.
    std::vector<double> f;
    double K = 0.0;
    int f_dim = -1;
    for (int d = 0; d < grid.dims() && f_dim < 0; ++d) {
        auto cand = coordinate_function(mdp_true, grid, d, 1.0, 0.0);
        const double k = action_gap(mdp_true, s, a0, a1, cand);
        if (std::abs(k) > 1e-12) {
            f = std::move(cand);
            K = k;
            f_dim = d;
        }
    }
    for (int d = 0; d < grid.dims() && f_dim < 0; ++d)
        for (int c = 0; c < grid.dim_cells(d) && f_dim < 0; ++c) {
            auto cand = indicator_function(mdp_true, grid, d, c);
            const double k = action_gap(mdp_true, s, a0, a1, cand);
            if (std::abs(k) > 1e-12) {
                f = std::move(cand);
                K = k;
                f_dim = d;
            }
        }
    if (f_dim < 0)
        throw std::runtime_error("construct_dr_reward: action marginals identical "
                                 "(K = 0 for every basis function)");
    if (K < 0.0) {
        for (auto& v : f) v = -v;
        K = -K;
    }

    // x in (-alpha/K, -(alpha+beta)/K); nonempty since beta < 0.
    const double lo = -ab0.alpha / K;
    const double hi = -(ab0.alpha + ab0.beta) / K;
    const auto try_x = [&](double x) {
        DrReward dr;
        dr.r_next = combine(r_base, 1.0, f, x);
        dr.x = x;
        dr.f_dim = f_dim;
        dr.ab = ab_of(dr.r_next);
        return dr;
    };
    DrReward dr = try_x(0.5 * (lo + hi));
    if (!(dr.ab.alpha > 0.0 && dr.ab.alpha < -dr.ab.beta)) {
        // Multi-step MDPs can bend alpha away from the affine prediction;
        // scan the interval before giving up.
        for (int q = 1; q < 64 && !(dr.ab.alpha > 0.0 && dr.ab.alpha < -dr.ab.beta); ++q)
            dr = try_x(lo + (hi - lo) * static_cast<double>(q) / 64.0);
    }
    if (!(dr.ab.alpha > 0.0 && dr.ab.alpha < -dr.ab.beta))
        throw std::runtime_error("construct_dr_reward: no x in the candidate interval satisfied "
                                 "0 < alpha < -beta");
    return dr;
}

double verify_beta_zero(const planning::TabularMDP& mdp_true,
                        const planning::TabularMDP& mdp_lagged) {
    const auto vi_true = planning::value_iteration(mdp_true, {.tol = 1e-12, .max_iterations = 1000000});
    const auto vi_lag = planning::value_iteration(mdp_lagged, {.tol = 1e-12, .max_iterations = 1000000});
    double max_abs = 0.0;
    for (int s = 0; s < mdp_true.n_states(); ++s) {
        if (mdp_true.is_terminal(s)) continue;
        for (int a0 = 0; a0 < mdp_true.n_actions(); ++a0)
            for (int a1 = a0 + 1; a1 < mdp_true.n_actions(); ++a1) {
                const double alpha = vi_true.q.at(s, a0) - vi_true.q.at(s, a1);
                const double beta = (vi_lag.q.at(s, a0) - vi_lag.q.at(s, a1)) - alpha;
                max_abs = std::max(max_abs, std::abs(beta));
            }
    }
    return max_abs;
}

}  // namespace inslab::theorylab
