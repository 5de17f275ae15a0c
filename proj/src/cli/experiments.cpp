#include "inslab/cli/experiments.hpp"

#include "inslab/cli/theory_report.hpp"
#include "inslab/csv.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace inslab::cli {

namespace {

void parallel_tasks(int n_tasks, const std::function<void(int)>& fn) {
    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(n_tasks));
    if (workers <= 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n_tasks) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void ensure_dir(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
}

std::string mode_name(models::ModelMode m) {
    return m == models::ModelMode::instantaneous ? "instantaneous" : "lagged";
}

planning::TrainLoopConfig make_loop_config(const ExperimentConfig& cfg,
                                           models::ModelMode mode) {
    if (!cfg.model.grid) throw std::invalid_argument("experiment requires model.grid");
    planning::TrainLoopConfig tc(*cfg.model.grid);
    tc.epochs = cfg.loop.epochs;
    tc.env_steps = cfg.loop.env_steps;
    tc.model_rollouts = cfg.loop.rollouts;
    tc.grad_updates = cfg.loop.updates;
    tc.rollout_k = cfg.loop.rollout_k;
    tc.mean_kind = cfg.model.mean_kind;
    tc.mode = mode;
    tc.scale_kind = cfg.model.scale_kind;
    tc.model_grid = cfg.model.grid;
    tc.corr_window = cfg.model.corr_window;
    tc.corr_shrink = cfg.model.corr_shrink;
    tc.corr_update_every = cfg.model.corr_update_every;
    tc.q_learning_rate = cfg.loop.q_learning_rate;
    tc.eps0 = cfg.loop.eps0;
    tc.eps_decay = cfg.loop.eps_decay;
    tc.eps_floor = cfg.loop.eps_floor;
    tc.eval_episodes = cfg.loop.eval_episodes;
    return tc;
}

// Dataset of `n` transitions from a random policy; used as the common
// evaluation set for both model modes of a seed.
Dataset collect_eval_dataset(const envs::Env& env, int n, RngStream rng) {
    Dataset ds(Dataset::Provenance::environment);
    StateVec s = env.initial_state(rng);
    int steps_in_episode = 0;
    while (static_cast<int>(ds.size()) < n) {
        const ActionId a =
            static_cast<ActionId>(rng.uniform_int(static_cast<std::uint32_t>(env.n_actions())));
        const auto res = env.step(s, a, rng);
        ds.push(TransitionRecord{s, a, res.next, res.reward, res.terminal});
        ++steps_in_episode;
        if (res.terminal || steps_in_episode >= env.max_steps()) {
            s = env.initial_state(rng);
            steps_in_episode = 0;
        } else {
            s = res.next;
        }
    }
    return ds;
}

ModeRunLog run_one_mode(const envs::Env& env, const ExperimentConfig& cfg,
                        models::ModelMode mode, std::uint64_t seed, const Dataset& eval_ds) {
    RngStream rng = RngStream(seed).split(mode_name(mode));
    const auto tc = make_loop_config(cfg, mode);
    auto result = planning::train_loop(env, tc, rng);

    ModeRunLog log;
    log.mode = mode;
    log.seed = seed;
    log.curve = std::move(result.curve);
    RngStream eval_rng = RngStream(seed).split("final-eval");
    std::tie(log.final_return, std::ignore) =
        planning::policy_return(env, result.greedy_policy, tc.policy_grid,
                                cfg.loop.final_eval_episodes, env.discount(), eval_rng);
    if (result.final_model) {
        log.final_ll = models::mean_likelihood_loss(*result.final_model, eval_ds);
        log.marginal_ll = models::marginal_likelihood_losses(*result.final_model, eval_ds);
        log.final_corr = result.final_model->mode == models::ModelMode::instantaneous
                             ? result.final_model->corr.entries()
                             : Eigen::MatrixXd::Identity(env.state_dim(), env.state_dim());
    }
    return log;
}

}  // namespace

VisualRegionResult run_visual_region(const ExperimentConfig& cfg) {
    if (cfg.env.name != "driving")
        throw std::invalid_argument("visual_region: env must be driving");
    const auto& params = cfg.env.driving;
    if (cfg.planning.one_step &&
        params.reward_mode == envs::DrivingRewardMode::step_penalty)
        throw std::invalid_argument(
            "visual_region: one_step planning needs pv_product or terminal_quadratic reward");
    if (!cfg.planning.one_step &&
        params.reward_mode != envs::DrivingRewardMode::step_penalty)
        throw std::invalid_argument(
            "visual_region: episodic planning supports the step_penalty reward");

    VisualRegionResult out;
    out.region = planning::driving_region(params);

    const planning::Grid grid = *cfg.planning.grid;
    const envs::EnvPtr env = make_env(cfg.env);

    out.maps_true.resize(cfg.seeds.size());
    out.maps_lagged.resize(cfg.seeds.size());
    out.metrics_true.resize(cfg.seeds.size());
    out.metrics_lagged.resize(cfg.seeds.size());

    parallel_tasks(static_cast<int>(cfg.seeds.size()), [&](int i) {
        const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
        RngStream rng = RngStream(seed).split("discretize");

        planning::DiscretizeOptions opts;
        opts.one_step = cfg.planning.one_step;
        if (cfg.planning.one_step) {
            opts.use_env_reward = false;
            if (params.reward_mode == envs::DrivingRewardMode::pv_product)
                opts.next_state_reward = [](const StateVec& s) { return s[0] * s[1]; };
            else
                opts.next_state_reward = [](const StateVec& s) {
                    const double r = std::abs(s[0]) + std::abs(s[1]);
                    return -r * r;
                };
        }
        const auto mdp_true = planning::discretize(*env, grid, cfg.planning.n_mc, rng, opts);
        const auto mdp_lagged = planning::laggedize(mdp_true, grid);

        const planning::VIOptions vi{cfg.planning.vi_tol, cfg.planning.vi_max_iters};
        const auto sol_true = planning::value_iteration(mdp_true, vi);
        const auto sol_lagged = planning::value_iteration(mdp_lagged, vi);

        out.maps_true[static_cast<std::size_t>(i)] = planning::policy_map(sol_true.policy, grid);
        out.maps_lagged[static_cast<std::size_t>(i)] =
            planning::policy_map(sol_lagged.policy, grid);

        RngStream eval_true = RngStream(seed).split("metrics-true");
        RngStream eval_lag = RngStream(seed).split("metrics-lagged");
        out.metrics_true[static_cast<std::size_t>(i)] = planning::evaluate_policy_metrics(
            *env, sol_true.policy, grid, cfg.planning.eval_episodes, params.discount, eval_true);
        out.metrics_lagged[static_cast<std::size_t>(i)] = planning::evaluate_policy_metrics(
            *env, sol_lagged.policy, grid, cfg.planning.eval_episodes, params.discount, eval_lag);
    });

    ensure_dir(cfg.output_dir);
    {
        nlohmann::json j;
        j["lower"] = out.region.lower;
        j["upper"] = out.region.upper;
        j["width"] = out.region.width();
        std::ofstream os(cfg.output_dir / "region.json");
        os << j.dump(2) << '\n';
    }
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        const auto tag = std::to_string(cfg.seeds[i]);
        std::ofstream t(cfg.output_dir / ("policy_map_true_seed" + tag + ".csv"));
        t << planning::policy_map_csv(out.maps_true[i]);
        std::ofstream l(cfg.output_dir / ("policy_map_lagged_seed" + tag + ".csv"));
        l << planning::policy_map_csv(out.maps_lagged[i]);
    }
    {
        CsvWriter csv({"model", "seed", "return_mean", "return_std", "distance_mean",
                       "distance_std", "length_mean", "length_std"});
        const auto add = [&](const char* model, const std::string& seed,
                             const planning::EpisodeMetrics& m) {
            csv.add_row({model, seed, format_double(m.return_mean), format_double(m.return_std),
                         format_double(m.distance_mean), format_double(m.distance_std),
                         format_double(m.length_mean), format_double(m.length_std)});
        };
        for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
            add("true", std::to_string(cfg.seeds[i]), out.metrics_true[i]);
        for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
            add("lagged", std::to_string(cfg.seeds[i]), out.metrics_lagged[i]);
        const auto aggregate = [&](const std::vector<planning::EpisodeMetrics>& ms) {
            planning::EpisodeMetrics agg;
            const double n = static_cast<double>(ms.size());
            double sr = 0, sr2 = 0, sd = 0, sd2 = 0, sl = 0, sl2 = 0;
            for (const auto& m : ms) {
                sr += m.return_mean;
                sr2 += m.return_mean * m.return_mean;
                sd += m.distance_mean;
                sd2 += m.distance_mean * m.distance_mean;
                sl += m.length_mean;
                sl2 += m.length_mean * m.length_mean;
            }
            agg.return_mean = sr / n;
            agg.distance_mean = sd / n;
            agg.length_mean = sl / n;
            if (ms.size() > 1) {
                agg.return_std = std::sqrt(std::max(0.0, (sr2 - n * agg.return_mean * agg.return_mean) / (n - 1)));
                agg.distance_std = std::sqrt(std::max(0.0, (sd2 - n * agg.distance_mean * agg.distance_mean) / (n - 1)));
                agg.length_std = std::sqrt(std::max(0.0, (sl2 - n * agg.length_mean * agg.length_mean) / (n - 1)));
            }
            return agg;
        };
        add("true", "aggregate", aggregate(out.metrics_true));
        add("lagged", "aggregate", aggregate(out.metrics_lagged));
        csv.save(cfg.output_dir / "metrics.csv");
    }
    return out;
}

ModelCompareResult run_model_compare(const ExperimentConfig& cfg) {
    const envs::EnvPtr env = make_env(cfg.env);
    const auto modes = {models::ModelMode::instantaneous, models::ModelMode::lagged};

    // Seed-shared evaluation datasets (same data for both modes).
    std::vector<Dataset> eval_sets;
    for (const auto seed : cfg.seeds)
        eval_sets.push_back(collect_eval_dataset(*env, 4000, RngStream(seed).split("eval-data")));

    ModelCompareResult out;
    out.runs.resize(cfg.seeds.size() * 2);
    parallel_tasks(static_cast<int>(out.runs.size()), [&](int t) {
        const std::size_t si = static_cast<std::size_t>(t) / 2;
        const auto mode = t % 2 == 0 ? models::ModelMode::instantaneous : models::ModelMode::lagged;
        out.runs[static_cast<std::size_t>(t)] =
            run_one_mode(*env, cfg, mode, cfg.seeds[si], eval_sets[si]);
    });

    ensure_dir(cfg.output_dir);
    CsvWriter returns({"mode", "seed", "epoch", "return_mean", "return_std"});
    CsvWriter likelihood({"mode", "seed", "epoch", "likelihood_loss"});
    CsvWriter corr({"mode", "seed", "epoch", "corr_pair"});
    const int dim = env->state_dim();
    std::vector<std::string> final_header{"mode", "seed", "final_return", "final_ll"};
    for (int d = 0; d < dim; ++d) final_header.push_back("marginal_ll_" + std::to_string(d));
    final_header.push_back("final_corr_pair");
    CsvWriter final_csv(final_header);

    for (const auto& run : out.runs) {
        const std::string mode = mode_name(run.mode);
        const std::string seed = std::to_string(run.seed);
        for (const auto& e : run.curve) {
            returns.add_row({mode, seed, std::to_string(e.epoch), format_double(e.return_mean),
                             format_double(e.return_std)});
            likelihood.add_row({mode, seed, std::to_string(e.epoch), format_double(e.likelihood)});
            corr.add_row({mode, seed, std::to_string(e.epoch), format_double(e.corr(0, 1))});
        }
        std::vector<std::string> row{mode, seed, format_double(run.final_return),
                                     format_double(run.final_ll)};
        for (int d = 0; d < dim; ++d)
            row.push_back(format_double(
                run.marginal_ll.empty() ? 0.0 : run.marginal_ll[static_cast<std::size_t>(d)]));
        row.push_back(format_double(run.final_corr.size() > 0 ? run.final_corr(0, 1) : 0.0));
        final_csv.add_row(row);
    }
    returns.save(cfg.output_dir / "returns.csv");
    likelihood.save(cfg.output_dir / "likelihood.csv");
    corr.save(cfg.output_dir / "corr.csv");
    final_csv.save(cfg.output_dir / "final.csv");
    return out;
}

namespace {

RewardFamiliesResult run_family_grid(const ExperimentConfig& cfg,
                                     const std::vector<envs::RewardFamilyTag>& families,
                                     const std::vector<std::string>& labels,
                                     const std::function<envs::EnvPtr(std::size_t)>& env_of) {
    RewardFamiliesResult out;
    const std::size_t n_seeds = cfg.seeds.size();
    out.runs.resize(families.size() * n_seeds * 2);

    std::vector<envs::EnvPtr> envs_by_family;
    for (std::size_t f = 0; f < families.size(); ++f) envs_by_family.push_back(env_of(f));

    parallel_tasks(static_cast<int>(out.runs.size()), [&](int t) {
        const std::size_t fi = static_cast<std::size_t>(t) / (n_seeds * 2);
        const std::size_t rem = static_cast<std::size_t>(t) % (n_seeds * 2);
        const std::size_t si = rem / 2;
        const auto mode =
            rem % 2 == 0 ? models::ModelMode::instantaneous : models::ModelMode::lagged;
        const auto& env = *envs_by_family[fi];
        RngStream rng = RngStream(cfg.seeds[si]).split(labels[fi]).split(mode_name(mode));
        const auto tc = make_loop_config(cfg, mode);
        auto result = planning::train_loop(env, tc, rng);
        RngStream eval_rng = RngStream(cfg.seeds[si]).split(labels[fi]).split("final-eval");
        FamilyRunLog log;
        log.family = labels[fi];
        log.mode = mode;
        log.seed = cfg.seeds[si];
        std::tie(log.final_return, std::ignore) =
            planning::policy_return(env, result.greedy_policy, tc.policy_grid,
                                    cfg.loop.final_eval_episodes, env.discount(), eval_rng);
        out.runs[static_cast<std::size_t>(t)] = std::move(log);
    });

    for (std::size_t f = 0; f < families.size(); ++f) {
        FamilyGap gap;
        gap.family = labels[f];
        int n_ins = 0, n_lag = 0;
        for (const auto& run : out.runs) {
            if (run.family != labels[f]) continue;
            if (run.mode == models::ModelMode::instantaneous) {
                gap.ins_mean += run.final_return;
                ++n_ins;
            } else {
                gap.lag_mean += run.final_return;
                ++n_lag;
            }
        }
        gap.ins_mean /= std::max(1, n_ins);
        gap.lag_mean /= std::max(1, n_lag);
        gap.gap = gap.ins_mean - gap.lag_mean;
        out.gaps.push_back(gap);
    }
    return out;
}

}  // namespace

RewardFamiliesResult run_reward_families(const ExperimentConfig& cfg) {
    if (cfg.env.name != "cartpole_lite")
        throw std::invalid_argument("reward_families: env must be cartpole_lite");
    const std::vector<envs::RewardFamilyTag> families{
        envs::RewardFamilyTag::Original, envs::RewardFamilyTag::A, envs::RewardFamilyTag::B,
        envs::RewardFamilyTag::C,        envs::RewardFamilyTag::D, envs::RewardFamilyTag::E};
    std::vector<std::string> labels;
    for (const auto f : families) labels.push_back(envs::RewardFamily::make(f).name());

    auto out = run_family_grid(cfg, families, labels, [&](std::size_t f) {
        EnvConfig env_cfg = cfg.env;
        env_cfg.family = families[f];
        return make_env(env_cfg);
    });

    ensure_dir(cfg.output_dir);
    CsvWriter runs({"family", "mode", "seed", "final_return"});
    for (const auto& r : out.runs)
        runs.add_row({r.family, mode_name(r.mode), std::to_string(r.seed),
                      format_double(r.final_return)});
    runs.save(cfg.output_dir / "families.csv");
    CsvWriter gaps({"family", "ins_mean", "lag_mean", "gap"});
    for (const auto& g : out.gaps)
        gaps.add_row({g.family, format_double(g.ins_mean), format_double(g.lag_mean),
                      format_double(g.gap)});
    gaps.save(cfg.output_dir / "gaps.csv");
    return out;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    SweepResult out;
    out.axis = cfg.sweep.axis;

    std::vector<envs::RewardFamilyTag> dummy(cfg.sweep.values.size(),
                                             envs::RewardFamilyTag::Original);
    std::vector<std::string> labels;
    for (const double v : cfg.sweep.values) labels.push_back(format_double(v));

    const auto family_result = run_family_grid(cfg, dummy, labels, [&](std::size_t i) {
        EnvConfig env_cfg = cfg.env;
        const double v = cfg.sweep.values[i];
        if (cfg.sweep.axis == "reward_coef") {
            if (!env_cfg.augment) env_cfg.augment = envs::RewardAugmentConfig{};
            env_cfg.augment->r_reward = v;
        } else if (cfg.sweep.axis == "corr_coef") {
            if (!env_cfg.noise) env_cfg.noise = envs::NoiseInjectConfig{};
            env_cfg.noise->pair_corr = v;
        } else {
            if (!env_cfg.noise) env_cfg.noise = envs::NoiseInjectConfig{};
            env_cfg.noise->r_noise = v;
        }
        return make_env(env_cfg);
    });
    out.runs = family_result.runs;
    for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
        SweepRow row;
        row.value = cfg.sweep.values[i];
        row.ins_mean = family_result.gaps[i].ins_mean;
        row.lag_mean = family_result.gaps[i].lag_mean;
        row.advantage =
            row.lag_mean != 0.0 ? (row.ins_mean - row.lag_mean) / row.lag_mean : 0.0;
        out.rows.push_back(row);
    }

    ensure_dir(cfg.output_dir);
    CsvWriter runs({"axis", "value", "mode", "seed", "final_return"});
    for (const auto& r : out.runs)
        runs.add_row({out.axis, r.family, mode_name(r.mode), std::to_string(r.seed),
                      format_double(r.final_return)});
    runs.save(cfg.output_dir / "sweep.csv");
    CsvWriter adv({"value", "ins_mean", "lag_mean", "advantage"});
    for (const auto& r : out.rows)
        adv.add_row({format_double(r.value), format_double(r.ins_mean),
                     format_double(r.lag_mean), format_double(r.advantage)});
    adv.save(cfg.output_dir / "advantage.csv");
    return out;
}

void run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment == "visual_region") {
        run_visual_region(cfg);
    } else if (cfg.experiment == "model_compare") {
        run_model_compare(cfg);
    } else if (cfg.experiment == "reward_families") {
        run_reward_families(cfg);
    } else if (cfg.experiment == "sweep") {
        run_sweep(cfg);
    } else if (cfg.experiment == "theory_report") {
        const auto report = run_theory_report(cfg.theory_mc,
                                              cfg.seeds.empty() ? 0 : cfg.seeds.front());
        ensure_dir(cfg.output_dir);
        std::ofstream os(cfg.output_dir / "theory_report.json");
        os << report.json.dump(2) << '\n';
    } else {
        throw std::invalid_argument("unknown experiment: " + cfg.experiment);
    }
}

}  // namespace inslab::cli
