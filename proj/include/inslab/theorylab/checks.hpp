#pragma once

#include "inslab/planning/tabular_mdp.hpp"
#include "inslab/rng.hpp"
#include "inslab/theorylab/quadratic.hpp"

#include <functional>
#include <string>
#include <vector>

namespace inslab::theorylab {

using SamplerFn = std::function<Eigen::VectorXd(RngStream&)>;
using TestFn = std::function<double(const Eigen::VectorXd&)>;

struct McEstimate {
    double estimate = 0.0;
    double std_err = 0.0;
};

// Monte-Carlo estimate of integral (P - Phat) F via the difference of paired
// samples under common random numbers: each draw hands both samplers an
// identical child stream.
McEstimate mc_integral_gap(const SamplerFn& p_sampler, const SamplerFn& phat_sampler,
                           const TestFn& f, int n_mc, RngStream& rng);

// Gaussian next-state pair: the true joint and its lagged (diagonal)
// counterpart sharing the same mean and marginal variances.
struct GaussianPair {
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov_true;
    Eigen::MatrixXd cov_lagged;  // typically diag(cov_true)

    static GaussianPair from_true(Eigen::VectorXd mu, Eigen::MatrixXd cov);
    SamplerFn sampler_true() const;
    SamplerFn sampler_lagged() const;
};

struct GvCheckResult {
    McEstimate lhs;       // gap with F
    McEstimate rhs;       // gap with G_F only
    double lhs_closed = 0.0;
    double rhs_closed = 0.0;
    bool mc_agree = false;       // |lhs - rhs| < 4 combined SE
    bool closed_agree = false;   // closed forms match to 1e-9
};

// Formula-2 check: integral (P - Phat) F == integral (P - Phat) G_F, by Monte
// Carlo and in closed form for the Gaussian pair.
GvCheckResult theorem_gv_check(const GaussianPair& pair, const QuadraticFunction& f,
                               const DepStructure& dep, int n_mc, RngStream& rng);

struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
};

// alpha = Q*_P(s,a0) - Q*_P(s,a1); beta = [Q*_Phat(s,a0) - Q*_Phat(s,a1)] - alpha.
AlphaBeta alpha_beta(const planning::TabularMDP& mdp_true,
                     const planning::TabularMDP& mdp_lagged, int s, int a0, int a1);

struct BetaSymmetryResult {
    bool negation_ok = false;     // beta(-R) == -beta(R) (exact)
    bool invariance_ok = false;   // beta(R + f(s_i)) == beta(R) to 1e-12
    double max_invariance_err = 0.0;
};

// Lemma-4.6 identities on a single-step MDP pair carrying a next-state
// reward; f-invariance is checked over `n_random_f` random single-dimension
// affine functions.
BetaSymmetryResult beta_symmetry_check(const planning::TabularMDP& mdp_true,
                                       const planning::TabularMDP& mdp_lagged,
                                       const planning::Grid& grid, int s, int a0, int a1,
                                       int n_random_f, RngStream& rng);

struct DrReward {
    std::vector<double> r_next;  // the constructed reward over states
    double x = 0.0;              // coefficient on the chosen f
    int f_dim = -1;              // dimension of the chosen coordinate function
    AlphaBeta ab;                // alpha/beta of the constructed reward
};

// Theorem-4.6 construction: returns R1 = +-R0 + x f with 0 < alpha < -beta
// verified exactly on the rebuilt MDP pair. The f basis is the per-dimension
// coordinate projections followed by per-dimension cell indicators.
// Throws if every usable f has K = 0 ("action marginals identical") or
// beta(R0) = 0 ("no instantaneous dependence detected").
DrReward construct_dr_reward(const planning::TabularMDP& mdp_true,
                             const planning::TabularMDP& mdp_lagged,
                             const planning::Grid& grid, int s, int a0, int a1,
                             const std::vector<double>& r0_next);

// Max |beta| over all non-terminal states and action pairs.
double verify_beta_zero(const planning::TabularMDP& mdp_true,
                        const planning::TabularMDP& mdp_lagged);

}  // namespace inslab::theorylab
