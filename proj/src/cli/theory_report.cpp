#include "inslab/cli/theory_report.hpp"

#include "inslab/envs/driving.hpp"
#include "inslab/envs/linear_gaussian.hpp"
#include "inslab/planning/planner.hpp"
#include "inslab/theorylab/checks.hpp"
#include "inslab/theorylab/fixtures.hpp"

#include <cmath>

namespace inslab::cli {

namespace {

using nlohmann::json;
using namespace inslab::theorylab;

json check(const std::string& name, bool pass, json values) {
    values["name"] = name;
    values["pass"] = pass;
    return values;
}

Eigen::MatrixXd sample_cov(const std::vector<Eigen::VectorXd>& xs) {
    const auto n = static_cast<double>(xs.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(xs.front().size());
    for (const auto& x : xs) mean += x;
    mean /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(mean.size(), mean.size());
    for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
    return cov / (n - 1.0);
}

bool cov_within_5se(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& expect, double n) {
    for (long i = 0; i < sample.rows(); ++i)
        for (long j = 0; j < sample.cols(); ++j) {
            const double se = std::sqrt(
                (expect(i, i) * expect(j, j) + expect(i, j) * expect(i, j)) / n);
            if (std::abs(sample(i, j) - expect(i, j)) > 5.0 * std::max(se, 1e-12)) return false;
        }
    return true;
}

}  // namespace

TheoryReport run_theory_report(int n_mc, std::uint64_t seed) {
    json checks = json::array();
    RngStream root(seed);

    // Driving region closed form, Table 1 and the widened g_ratio.
    {
        envs::DrivingParams p;  // Table 1 defaults
        const auto table1 = planning::driving_region(p);
        envs::DrivingParams wide = p;
        wide.g_ratio = 1.0;
        const auto widened = planning::driving_region(wide);
        const bool pass = std::abs(table1.upper - (-1.1)) < 1e-12 &&
                          std::abs(table1.lower - (-1.1 - 0.0099 / 0.9)) < 1e-12 &&
                          std::abs(widened.upper - (-1.1)) < 1e-12 &&
                          std::abs(widened.lower - (-2.2)) < 1e-12;
        checks.push_back(check("driving_region_closed_form", pass,
                               {{"table1_lower", table1.lower},
                                {"table1_upper", table1.upper},
                                {"widened_lower", widened.lower},
                                {"widened_upper", widened.upper}}));
    }

    // Corollary 4.1 on a 3-D Gaussian: dims (0,1) dependent with rho = 0.9,
    // dim 2 independent of both.
    {
        const double rho = 0.9, s0 = 1.0, s1 = 0.8, s2 = 1.2;
        Eigen::MatrixXd cov(3, 3);
        cov << s0 * s0, rho * s0 * s1, 0.0,
               rho * s0 * s1, s1 * s1, 0.0,
               0.0, 0.0, s2 * s2;
        Eigen::VectorXd mu(3);
        mu << 0.4, -0.3, 0.2;
        const auto pair = GaussianPair::from_true(mu, cov);
        const auto p = pair.sampler_true();
        const auto q = pair.sampler_lagged();

        RngStream r1 = root.split("c41-const");
        const auto g_const = mc_integral_gap(p, q, [](const Eigen::VectorXd&) { return 3.7; },
                                             n_mc, r1);
        RngStream r2 = root.split("c41-single");
        const auto g_single = mc_integral_gap(
            p, q, [](const Eigen::VectorXd& s) { return s[0] * s[0] * s[0] - 2.0 * s[0]; }, n_mc,
            r2);
        RngStream r3 = root.split("c41-indep");
        const auto g_indep = mc_integral_gap(
            p, q, [](const Eigen::VectorXd& s) { return s[0] * s[2]; }, n_mc, r3);
        RngStream r4 = root.split("c41-dep");
        const auto g_dep = mc_integral_gap(
            p, q, [](const Eigen::VectorXd& s) { return s[0] * s[1]; }, n_mc, r4);
        const double expected = rho * s0 * s1;
        const double closed =
            gaussian_expectation(QuadraticFunction::cross_term(3, 0, 1, 1.0), mu, cov) -
            gaussian_expectation(QuadraticFunction::cross_term(3, 0, 1, 1.0), mu,
                                 pair.cov_lagged);
        const bool pass =
            std::abs(g_const.estimate) < 4.0 * std::max(g_const.std_err, 1e-12) &&
            std::abs(g_single.estimate) < 4.0 * std::max(g_single.std_err, 1e-12) &&
            std::abs(g_indep.estimate) < 4.0 * std::max(g_indep.std_err, 1e-12) &&
            std::abs(g_dep.estimate - expected) < 4.0 * g_dep.std_err &&
            std::abs(closed - expected) < 1e-9;
        checks.push_back(check("corollary41_integral_gaps", pass,
                               {{"constant", g_const.estimate},
                                {"single_dim", g_single.estimate},
                                {"independent_pair", g_indep.estimate},
                                {"dependent_pair", g_dep.estimate},
                                {"dependent_expected", expected},
                                {"dependent_closed_form", closed}}));
    }

    // Theorem 4.2: gap(F) == gap(G_F), MC and closed form.
    {
        const double rho = 0.9;
        Eigen::MatrixXd cov(3, 3);
        cov << 1.0, rho, 0.0, rho, 1.0, 0.0, 0.0, 0.0, 1.0;
        Eigen::VectorXd mu(3);
        mu << 1.0, 1.0, -0.5;
        const auto pair = GaussianPair::from_true(mu, cov);
        Eigen::MatrixXd A(3, 3);
        A << 2.0, -0.7, 0.4, -0.7, 1.0, 0.0, 0.4, 0.0, -1.5;
        Eigen::VectorXd b(3);
        b << 1.0, 0.0, -2.0;
        const QuadraticFunction f(A, b, 3.0);
        const DepStructure dep(3, {{0, 1}});
        RngStream r = root.split("gv");
        const auto gv = theorem_gv_check(pair, f, dep, n_mc, r);
        checks.push_back(check("theorem_gv_equivalence", gv.mc_agree && gv.closed_agree,
                               {{"lhs_mc", gv.lhs.estimate},
                                {"rhs_mc", gv.rhs.estimate},
                                {"lhs_closed", gv.lhs_closed},
                                {"rhs_closed", gv.rhs_closed}}));
    }

    // Gaussian quadratic expectation lemma.
    {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
        const double e1 = gaussian_quadratic_expectation(Eigen::VectorXd::Zero(2),
                                                         Eigen::MatrixXd::Identity(2, 2), A);
        Eigen::MatrixXd cross(2, 2);
        cross << 0.0, 1.0, 1.0, 0.0;
        Eigen::MatrixXd cov(2, 2);
        cov << 1.0, 0.9, 0.9, 1.0;
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
        const double e2 = gaussian_quadratic_expectation(ones, cov, cross);
        const bool pass = std::abs(e1 - 2.0) < 1e-12 && std::abs(e2 - 3.8) < 1e-12;
        checks.push_back(
            check("gaussian_quadratic_expectation", pass, {{"identity", e1}, {"cross", e2}}));
    }

    // Two-bit MDP: alpha/beta, D_R membership, Lemma-4.1 witness, exact J gap.
    {
        auto two_bit = make_two_bit_mdp();
        const auto ab = alpha_beta(two_bit.mdp_true, two_bit.mdp_lagged, two_bit.start_state, 0, 1);
        const bool ab_ok = std::abs(ab.alpha - 0.5) < 1e-12 && std::abs(ab.beta + 0.48) < 1e-12;

        const auto dr = construct_dr_reward(two_bit.mdp_true, two_bit.mdp_lagged, two_bit.grid,
                                            two_bit.start_state, 0, 1, two_bit.reward_match);
        const bool dr_ok = dr.ab.alpha > 0.0 && dr.ab.alpha < -dr.ab.beta;

        const auto mdp_true_dr = planning::with_next_state_reward(two_bit.mdp_true, dr.r_next);
        const auto mdp_lag_dr = planning::with_next_state_reward(two_bit.mdp_lagged, dr.r_next);
        const auto witnesses =
            planning::consistency_check(mdp_true_dr, mdp_lag_dr, {two_bit.start_state});
        const bool witness_ok = witnesses.size() == 1 && witnesses.front().state == two_bit.start_state;

        double j_gap = 0.0;
        if (witness_ok) {
            const auto vi_true = planning::value_iteration(mdp_true_dr);
            const auto vi_lag = planning::value_iteration(mdp_lag_dr);
            const auto v_true = planning::exact_policy_value(mdp_true_dr, vi_true.policy);
            const auto v_lag = planning::exact_policy_value(mdp_true_dr, vi_lag.policy);
            j_gap = v_true[static_cast<std::size_t>(two_bit.start_state)] -
                    v_lag[static_cast<std::size_t>(two_bit.start_state)];
        }
        const bool jgap_ok = witness_ok && std::abs(j_gap - dr.ab.alpha) < 1e-12;

        RngStream r = root.split("beta-sym");
        const auto sym = beta_symmetry_check(two_bit.mdp_true, two_bit.mdp_lagged, two_bit.grid,
                                             two_bit.start_state, 0, 1, 10, r);

        checks.push_back(check("two_bit_alpha_beta", ab_ok,
                               {{"alpha", ab.alpha}, {"beta", ab.beta}}));
        checks.push_back(check("dr_construction", dr_ok,
                               {{"x", dr.x},
                                {"alpha", dr.ab.alpha},
                                {"beta", dr.ab.beta},
                                {"f_dim", dr.f_dim}}));
        checks.push_back(check("lemma41_witness_and_gap", jgap_ok,
                               {{"witnesses", witnesses.size()}, {"j_gap", j_gap}}));
        checks.push_back(check("beta_symmetries", sym.negation_ok && sym.invariance_ok,
                               {{"max_invariance_err", sym.max_invariance_err}}));
    }

    // Theorem 4.5 regime on the factored MDP.
    {
        auto fm = make_factored_mdp();
        const auto mdp_sep =
            planning::with_next_state_reward(fm.mdp, factored_separable_reward(fm));
        const auto lag_sep = planning::laggedize(mdp_sep, fm.grid);
        const double beta_sep = verify_beta_zero(mdp_sep, lag_sep);

        const auto mdp_cross = planning::with_next_state_reward(fm.mdp, factored_cross_reward(fm));
        const auto lag_cross = planning::laggedize(mdp_cross, fm.grid);
        const double beta_cross = verify_beta_zero(mdp_cross, lag_cross);

        checks.push_back(check("theorem45_beta_zero", beta_sep < 1e-5 && beta_cross > 0.01,
                               {{"max_beta_separable", beta_sep},
                                {"max_beta_cross", beta_cross}}));
    }

    // Compound-noise covariances: closed forms vs honest simulation.
    {
        Eigen::MatrixXd A(2, 2);
        A << 0.5, 0.3, 0.0, 0.4;
        Eigen::MatrixXd S(2, 2);
        S << 1.0, 0.2, 0.2, 0.5;
        const envs::LinearGaussianSpec spec{A, S, 3};
        const int n = 100000;
        RngStream r1 = root.split("subsampled");
        const auto sub = cov_within_5se(sample_cov(envs::simulate_subsampled_noise(spec, n, r1)),
                                        envs::subsampled_noise_cov(spec), n);
        RngStream r2 = root.split("aggregated");
        const auto agg = cov_within_5se(sample_cov(envs::simulate_aggregated_noise(spec, n, r2)),
                                        envs::aggregated_noise_cov(spec), n);
        checks.push_back(check("compound_noise_covariances", sub && agg,
                               {{"subsampled_ok", sub}, {"aggregated_ok", agg}}));
    }

    TheoryReport report;
    report.all_pass = true;
    for (const auto& c : checks)
        if (!c.at("pass").get<bool>()) report.all_pass = false;
    report.json = {{"checks", checks}, {"all_pass", report.all_pass}, {"n_mc", n_mc}};
    return report;
}

}  // namespace inslab::cli
