// Acceptance suite: runs the ten project acceptance checks end to end and
// prints one PASS/FAIL line per criterion. Exit code 0 iff everything passes.

#include "inslab/cli/config.hpp"
#include "inslab/cli/experiments.hpp"
#include "inslab/envs/driving.hpp"
#include "inslab/envs/linear_gaussian.hpp"
#include "inslab/envs/wrappers.hpp"
#include "inslab/planning/planner.hpp"
#include "inslab/rollout.hpp"
#include "inslab/theorylab/checks.hpp"
#include "inslab/theorylab/fixtures.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace inslab;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
    std::printf("[%s] criterion %2d: %-34s (%8.2f s)  %s\n", pass ? "PASS" : "FAIL", criterion,
                name.c_str(), seconds, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run(int criterion, const std::string& name, double budget_seconds,
         const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool pass = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        pass = false;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (seconds > budget_seconds) {
        pass = false;
        detail += " [over the " + std::to_string(budget_seconds) + " s budget]";
    }
    report(criterion, name, pass, seconds, detail);
}

Eigen::MatrixXd sample_cov(const std::vector<Eigen::VectorXd>& xs) {
    const double n = static_cast<double>(xs.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(xs.front().size());
    for (const auto& x : xs) mean += x;
    mean /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(mean.size(), mean.size());
    for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
    return cov / (n - 1.0);
}

bool cov_within_se(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& expect, double n,
                   double k) {
    for (long i = 0; i < sample.rows(); ++i)
        for (long j = 0; j < sample.cols(); ++j) {
            const double se =
                std::sqrt((expect(i, i) * expect(j, j) + expect(i, j) * expect(i, j)) / n);
            if (std::abs(sample(i, j) - expect(i, j)) > k * std::max(se, 1e-12)) return false;
        }
    return true;
}

// ---------------------------------------------------------------------------

void criterion_1_region_closed_form() {
    run(1, "region closed form", 60.0, [](std::string& detail) {
        envs::DrivingParams table1;  // Table-1 defaults
        const auto t0 = std::chrono::steady_clock::now();
        const auto band = planning::driving_region(table1);
        envs::DrivingParams widened = table1;
        widened.g_ratio = 1.0;
        const auto wide = planning::driving_region(widened);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        const bool values_ok = std::abs(band.upper - (-1.1)) < 1e-12 &&
                               std::abs(band.lower - (-1.1 - 0.0099 / 0.9)) < 1e-12 &&
                               std::abs(wide.upper - (-1.1)) < 1e-12 &&
                               std::abs(wide.lower - (-2.2)) < 1e-12;
        std::ostringstream os;
        os << "band (" << band.lower << ", " << band.upper << "), widened (" << wide.lower
           << ", " << wide.upper << "), " << ms << " ms";
        detail = os.str();
        return values_ok && ms < 1.0;
    });
}

void criterion_2_region_vs_planner() {
    run(2, "region vs planner (64x64, 3 seeds)", 120.0, [](std::string& detail) {
        envs::DrivingParams p;
        p.sign_mode = envs::DrivingSignMode::appendix;
        p.reward_mode = envs::DrivingRewardMode::pv_product;
        p.g_ratio = 1.0;
        envs::DrivingEnv env(p);
        const planning::Grid grid({{-2, 2, 64}, {-2, 2, 64}});
        const auto band = planning::driving_region(p);
        const double u_cell = grid.cell_width(0) / p.dt + 2.0 * grid.cell_width(1);

        int total_mismatch = 0;
        int total_inside = 0;
        for (std::uint64_t seed : {0u, 1u, 2u}) {
            RngStream rng(seed);
            planning::DiscretizeOptions opts;
            opts.one_step = true;
            opts.use_env_reward = false;
            opts.next_state_reward = [](const StateVec& s) { return s[0] * s[1]; };
            const auto mdp = planning::discretize(env, grid, 6000, rng, opts);
            const auto lagged = planning::laggedize(mdp, grid);
            const auto sol_true = planning::value_iteration(mdp);
            const auto sol_lag = planning::value_iteration(lagged);
            for (int c = 0; c < grid.size(); ++c) {
                if (mdp.is_terminal(c)) continue;
                const auto center = grid.center(c);
                const double u = center[0] / p.dt + 2.0 * center[1];
                const bool inside = band.lower < u && u < band.upper;
                const bool differs = sol_true.policy[static_cast<std::size_t>(c)] !=
                                     sol_lag.policy[static_cast<std::size_t>(c)];
                const bool near = std::abs(u - band.lower) <= u_cell ||
                                  std::abs(u - band.upper) <= u_cell;
                if (inside) ++total_inside;
                if (differs != inside && !near) ++total_mismatch;
            }
        }
        std::ostringstream os;
        os << total_mismatch << " off-band mismatches, " << total_inside
           << " in-band cells over 3 seeds";
        detail = os.str();
        return total_mismatch == 0 && total_inside > 0;
    });
}

void criterion_3_corollary41() {
    run(3, "corollary 4.1 integral suite", 30.0, [](std::string& detail) {
        using namespace inslab::theorylab;
        // Correlated pair (0,1) with rho = 0.9 embedded with one extra
        // independent dimension so an independent pair exists.
        const double rho = 0.9, s0 = 1.0, s1 = 0.8;
        Eigen::MatrixXd cov(3, 3);
        cov << s0 * s0, rho * s0 * s1, 0.0, rho * s0 * s1, s1 * s1, 0.0, 0.0, 0.0, 1.44;
        Eigen::VectorXd mu(3);
        mu << 0.4, -0.3, 0.2;
        const auto pair = GaussianPair::from_true(mu, cov);
        const auto p = pair.sampler_true();
        const auto q = pair.sampler_lagged();
        const int n = 1000000;
        RngStream root(1234);

        RngStream r1 = root.split("c");
        const auto g_const =
            mc_integral_gap(p, q, [](const Eigen::VectorXd&) { return 2.5; }, n, r1);
        RngStream r2 = root.split("f");
        const auto g_single = mc_integral_gap(
            p, q, [](const Eigen::VectorXd& s) { return s[0] * s[0] * s[0] - s[0]; }, n, r2);
        RngStream r3 = root.split("g-indep");
        const auto g_indep = mc_integral_gap(
            p, q, [](const Eigen::VectorXd& s) { return s[0] * s[2] + std::sin(s[2]); }, n, r3);
        RngStream r4 = root.split("g-dep");
        const auto g_dep = mc_integral_gap(
            p, q, [](const Eigen::VectorXd& s) { return s[0] * s[1]; }, n, r4);

        const double expected = rho * s0 * s1;
        const auto cross = QuadraticFunction::cross_term(3, 0, 1, 1.0);
        const double closed = gaussian_expectation(cross, mu, cov) -
                              gaussian_expectation(cross, mu, pair.cov_lagged);

        const bool ok = std::abs(g_const.estimate) <= 4 * std::max(g_const.std_err, 1e-12) &&
                        std::abs(g_single.estimate) <= 4 * std::max(g_single.std_err, 1e-12) &&
                        std::abs(g_indep.estimate) <= 4 * std::max(g_indep.std_err, 1e-12) &&
                        std::abs(g_dep.estimate - expected) <= 4 * g_dep.std_err &&
                        std::abs(closed - expected) < 1e-9;
        std::ostringstream os;
        os << "gaps: const " << g_const.estimate << ", single " << g_single.estimate
           << ", indep " << g_indep.estimate << ", dep " << g_dep.estimate << " (expect "
           << expected << ")";
        detail = os.str();
        return ok;
    });
}

void criterion_4_dr_construction() {
    run(4, "D_R construction on the 2-bit MDP", 1.0, [](std::string& detail) {
        using namespace inslab::theorylab;
        const auto tb = make_two_bit_mdp();
        const auto ab = alpha_beta(tb.mdp_true, tb.mdp_lagged, tb.start_state, 0, 1);
        const bool ab_ok = std::abs(ab.alpha - 0.5) < 1e-12 && std::abs(ab.beta + 0.48) < 1e-12;

        const auto dr = construct_dr_reward(tb.mdp_true, tb.mdp_lagged, tb.grid, tb.start_state,
                                            0, 1, tb.reward_match);
        const bool member = dr.ab.alpha > 0.0 && dr.ab.alpha < -dr.ab.beta;

        const auto mdp_true = planning::with_next_state_reward(tb.mdp_true, dr.r_next);
        const auto mdp_lag = planning::with_next_state_reward(tb.mdp_lagged, dr.r_next);
        const auto witnesses = planning::consistency_check(mdp_true, mdp_lag, {tb.start_state});
        const bool witness_ok =
            witnesses.size() == 1 && witnesses.front().state == tb.start_state &&
            witnesses.front().a0 == 0 && witnesses.front().a1 == 1;

        double j_gap = 0.0;
        if (witness_ok) {
            const auto vi_true = planning::value_iteration(mdp_true);
            const auto vi_lag = planning::value_iteration(mdp_lag);
            j_gap = planning::exact_policy_value(mdp_true, vi_true.policy)[0] -
                    planning::exact_policy_value(mdp_true, vi_lag.policy)[0];
        }
        const bool gap_ok = std::abs(j_gap - dr.ab.alpha) < 1e-12;

        std::ostringstream os;
        os << "alpha " << ab.alpha << ", beta " << ab.beta << "; constructed x " << dr.x
           << " -> (alpha, beta) = (" << dr.ab.alpha << ", " << dr.ab.beta << "), J gap "
           << j_gap;
        detail = os.str();
        return ab_ok && member && witness_ok && gap_ok;
    });
}

void criterion_5_beta_zero_regime() {
    run(5, "theorem 4.5 beta = 0 regime", 30.0, [](std::string& detail) {
        using namespace inslab::theorylab;
        const auto fm = make_factored_mdp(4, 0.5, 0.9);
        const auto sep = planning::with_next_state_reward(fm.mdp, factored_separable_reward(fm));
        const double beta_sep = verify_beta_zero(sep, planning::laggedize(sep, fm.grid));
        const auto cross = planning::with_next_state_reward(fm.mdp, factored_cross_reward(fm));
        const double beta_cross = verify_beta_zero(cross, planning::laggedize(cross, fm.grid));
        std::ostringstream os;
        os << "max|beta|: separable " << beta_sep << ", cross " << beta_cross;
        detail = os.str();
        return beta_sep < 1e-5 && beta_cross > 0.01;
    });
}

cli::ExperimentConfig model_compare_config() {
    cli::ExperimentConfig cfg;
    cfg.experiment = "model_compare";
    cfg.seeds = {0, 1, 2, 3, 4};
    cfg.output_dir = "acceptance_out/model_compare";
    cfg.env.name = "driving";
    cfg.env.driving.sigma_v = 0.0;
    cfg.env.driving.sigma_p = 0.0;
    cfg.env.driving.max_steps = 120;
    envs::NoiseInjectConfig noise;
    noise.r_noise = 0.4;
    noise.pair_corr = 0.9;
    noise.pairs = {{0, 1}};
    cfg.env.noise = noise;
    envs::RewardAugmentConfig augment;
    augment.r_reward = -5.0;
    augment.pairs = {{0, 1}};
    cfg.env.augment = augment;
    cfg.model.mean_kind = models::MeanKind::tabular_conditional;
    cfg.model.grid = planning::Grid({{-2, 2, 16}, {-2, 2, 16}});
    cfg.loop.epochs = 20;
    cfg.loop.env_steps = 400;
    cfg.loop.rollouts = 150;
    cfg.loop.updates = 3000;
    cfg.loop.rollout_k = 5;
    cfg.loop.eval_episodes = 10;
    cfg.loop.final_eval_episodes = 60;
    return cfg;
}

void criteria_6_7_model_compare() {
    cli::ModelCompareResult result;
    bool ran = false;
    std::string run_error;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        result = cli::run_model_compare(model_compare_config());
        ran = true;
    } catch (const std::exception& e) {
        run_error = e.what();
    }
    const double shared_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Criterion 6: likelihood losses.
    {
        bool pass = false;
        std::ostringstream os;
        if (ran) {
            pass = true;
            double worst_margin = 1e9;
            double worst_marg_rel = 0.0;
            for (std::size_t s = 0; s < result.runs.size(); s += 2) {
                const auto& ins = result.runs[s];
                const auto& lag = result.runs[s + 1];
                worst_margin = std::min(worst_margin, lag.final_ll - ins.final_ll);
                if (!(ins.final_ll < lag.final_ll)) pass = false;
                for (std::size_t d = 0; d < ins.marginal_ll.size(); ++d) {
                    const double rel = std::abs(ins.marginal_ll[d] - lag.marginal_ll[d]) /
                                       std::max(std::abs(lag.marginal_ll[d]), 1e-9);
                    worst_marg_rel = std::max(worst_marg_rel, rel);
                    if (rel > 0.02) pass = false;
                }
            }
            os << "min per-seed LL margin " << worst_margin << ", worst marginal rel diff "
               << worst_marg_rel;
        } else {
            os << "exception: " << run_error;
        }
        const bool in_budget = shared_seconds < 600.0;
        report(6, "likelihood loss (5 seeds)", pass && in_budget, shared_seconds, os.str());
    }

    // Criterion 7: policy returns.
    {
        bool pass = false;
        std::ostringstream os;
        if (ran) {
            double ins_mean = 0.0, lag_mean = 0.0;
            int positive = 0, n_seeds = 0;
            for (std::size_t s = 0; s < result.runs.size(); s += 2) {
                const double gap =
                    result.runs[s].final_return - result.runs[s + 1].final_return;
                ins_mean += result.runs[s].final_return;
                lag_mean += result.runs[s + 1].final_return;
                if (gap > 0) ++positive;
                ++n_seeds;
            }
            ins_mean /= n_seeds;
            lag_mean /= n_seeds;
            pass = ins_mean >= lag_mean && (ins_mean - lag_mean) > 0.0;
            os << "mean final return: INS " << ins_mean << " vs LAG " << lag_mean << "; "
               << positive << "/" << n_seeds << " seeds positive";
        } else {
            os << "exception: " << run_error;
        }
        const bool in_budget = shared_seconds < 1200.0;
        report(7, "policy return (5 seeds)", pass && in_budget, shared_seconds, os.str());
    }
}

void criterion_8_reward_families() {
    run(8, "reward families C/D/E dominate", 1800.0, [](std::string& detail) {
        cli::ExperimentConfig cfg;
        cfg.experiment = "reward_families";
        cfg.seeds = {0, 1, 2, 3, 4};
        cfg.output_dir = "acceptance_out/families";
        cfg.env.name = "cartpole_lite";
        cfg.env.cartpole.max_steps = 120;
        envs::NoiseInjectConfig noise;
        noise.r_noise = 0.1;
        noise.pair_corr = 0.5;
        cfg.env.noise = noise;
        cfg.model.mean_kind = models::MeanKind::linear_least_squares;
        cfg.model.grid =
            planning::Grid({{-1.2, 1.2, 3}, {-2.4, 2.4, 5}, {-0.21, 0.21, 5}, {-2.4, 2.4, 5}});
        cfg.loop.epochs = 15;
        cfg.loop.env_steps = 300;
        cfg.loop.rollouts = 120;
        cfg.loop.updates = 2500;
        cfg.loop.rollout_k = 5;
        cfg.loop.eval_episodes = 8;
        cfg.loop.final_eval_episodes = 40;

        const auto result = cli::run_reward_families(cfg);
        double base_max = -1e18;
        double dep_min = 1e18;
        std::ostringstream os;
        for (const auto& g : result.gaps) {
            os << g.family << ": " << g.gap << "  ";
            if (g.family == "original" || g.family == "A" || g.family == "B")
                base_max = std::max(base_max, g.gap);
            else
                dep_min = std::min(dep_min, g.gap);
        }
        detail = os.str();
        return dep_min > base_max;
    });
}

void criterion_9_step_model_distribution() {
    run(9, "step_model covariance (10 random)", 10.0, [](std::string& detail) {
        RngStream root(77);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            RngStream trial_rng = root.split(static_cast<std::uint64_t>(trial));
            const int dim = 2 + static_cast<int>(trial_rng.uniform_int(3));
            // Random correlation from a random PSD matrix, random scales.
            Eigen::MatrixXd raw(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) raw(i, j) = trial_rng.normal();
            Eigen::MatrixXd psd = raw * raw.transpose() +
                                  0.3 * Eigen::MatrixXd::Identity(dim, dim);
            Eigen::VectorXd d = psd.diagonal().cwiseSqrt().cwiseInverse();
            Eigen::MatrixXd corr_entries = d.asDiagonal() * psd * d.asDiagonal();
            corr_entries = 0.5 * (corr_entries + corr_entries.transpose());
            corr_entries.diagonal().setOnes();
            const auto corr = CorrelationMatrix::from_entries(corr_entries);
            std::vector<double> scales;
            for (int i = 0; i < dim; ++i) scales.push_back(trial_rng.uniform(0.2, 2.0));

            Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim + 1);
            w.leftCols(dim).setIdentity();
            models::DynamicsModel model{.mean = models::MeanPredictor::linear({w}),
                                        .mode = models::ModelMode::instantaneous,
                                        .scale_kind = models::ScaleKind::homoscedastic,
                                        .scales = scales,
                                        .prop_coef = {},
                                        .corr = corr};
            const StateVec s(static_cast<std::size_t>(dim), 0.0);
            const int n = 100000;
            std::vector<Eigen::VectorXd> samples;
            samples.reserve(n);
            RngStream sample_rng = trial_rng.split("samples");
            for (int i = 0; i < n; ++i)
                samples.push_back(to_eigen(rollout::step_model(model, s, 0, sample_rng)));
            Eigen::VectorXd ds(dim);
            for (int i = 0; i < dim; ++i) ds[i] = scales[static_cast<std::size_t>(i)];
            const Eigen::MatrixXd expect = ds.asDiagonal() * corr.entries() * ds.asDiagonal();
            const auto cov = sample_cov(samples);
            if (!cov_within_se(cov, expect, n, 5.0)) {
                detail = "trial " + std::to_string(trial) + " outside 5 SE";
                return false;
            }
            worst = std::max(worst, (cov - expect).cwiseAbs().maxCoeff());
        }
        detail = "10/10 within 5 SE (worst abs dev " + std::to_string(worst) + ")";
        return true;
    });
}

void criterion_10_compound_noise() {
    run(10, "compound-noise closed forms", 30.0, [](std::string& detail) {
        RngStream root(88);
        const int n = 100000;
        for (int trial = 0; trial < 5; ++trial) {
            RngStream trial_rng = root.split(static_cast<std::uint64_t>(trial));
            const int dim = 2 + static_cast<int>(trial_rng.uniform_int(2));
            Eigen::MatrixXd A(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) A(i, j) = trial_rng.normal();
            // Scale to spectral radius 0.8: stable.
            const double radius = A.eigenvalues().cwiseAbs().maxCoeff();
            A *= 0.8 / std::max(radius, 1e-9);
            Eigen::MatrixXd raw(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) raw(i, j) = trial_rng.normal();
            const Eigen::MatrixXd S =
                raw * raw.transpose() / dim + 0.2 * Eigen::MatrixXd::Identity(dim, dim);
            const int k = 2 + static_cast<int>(trial_rng.uniform_int(3));
            const envs::LinearGaussianSpec spec{A, S, k};

            RngStream sub_rng = trial_rng.split("sub");
            const auto sub = sample_cov(envs::simulate_subsampled_noise(spec, n, sub_rng));
            if (!cov_within_se(sub, envs::subsampled_noise_cov(spec), n, 5.0)) {
                detail = "subsampled trial " + std::to_string(trial) + " outside 5 SE";
                return false;
            }
            RngStream agg_rng = trial_rng.split("agg");
            const auto agg = sample_cov(envs::simulate_aggregated_noise(spec, n, agg_rng));
            if (!cov_within_se(agg, envs::aggregated_noise_cov(spec), n, 5.0)) {
                detail = "aggregated trial " + std::to_string(trial) + " outside 5 SE";
                return false;
            }
        }
        detail = "5/5 specs within 5 SE for both schemes";
        return true;
    });
}

}  // namespace

int main() {
    std::printf("inslab acceptance suite\n");
    criterion_1_region_closed_form();
    criterion_2_region_vs_planner();
    criterion_3_corollary41();
    criterion_4_dr_construction();
    criterion_5_beta_zero_regime();
    criteria_6_7_model_compare();
    criterion_8_reward_families();
    criterion_9_step_model_distribution();
    criterion_10_compound_noise();
    std::printf("ACCEPTANCE: %d/10 passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
