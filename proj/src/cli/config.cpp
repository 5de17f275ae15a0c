#include "inslab/cli/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>

namespace inslab::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

void require_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) fail(path, "unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(path + "." + key, e.what());
    }
}

planning::Grid parse_grid(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "grid must be a nonempty array of [lo, hi, cells]");
    std::vector<planning::GridDim> dims;
    for (const auto& d : j) {
        if (!d.is_array() || d.size() != 3) fail(path, "each grid dim must be [lo, hi, cells]");
        dims.push_back({d.at(0).get<double>(), d.at(1).get<double>(),
                        static_cast<int>(d.at(2).get<double>())});
    }
    return planning::Grid(dims);
}

std::vector<std::pair<int, int>> parse_pairs(const json& j, const std::string& path) {
    std::vector<std::pair<int, int>> pairs;
    if (!j.is_array()) fail(path, "pairs must be an array of [i, j]");
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2) fail(path, "each pair must be [i, j]");
        pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    }
    return pairs;
}

EnvConfig parse_env(const json& j, const std::string& path) {
    require_keys(j, path, {"name", "driving", "cartpole", "noise_inject", "reward_augment"});
    EnvConfig cfg;
    cfg.name = get_or<std::string>(j, path, "name", "driving");
    if (cfg.name != "driving" && cfg.name != "cartpole_lite")
        fail(path + ".name", "must be 'driving' or 'cartpole_lite'");

    if (j.contains("driving")) {
        const auto& d = j.at("driving");
        const std::string dp = path + ".driving";
        require_keys(d, dp,
                     {"dv", "dt", "sigma_v", "sigma_p", "g_ratio", "goal_radius", "step_penalty",
                      "max_steps", "discount", "sign_mode", "reward_mode"});
        auto& p = cfg.driving;
        if (d.contains("dv")) {
            const auto dv = d.at("dv").get<std::vector<double>>();
            if (dv.size() != 2) fail(dp + ".dv", "must be [dv0, dv1]");
            p.dv = {dv[0], dv[1]};
        }
        p.dt = get_or(d, dp, "dt", p.dt);
        p.sigma_v = get_or(d, dp, "sigma_v", p.sigma_v);
        p.sigma_p = get_or(d, dp, "sigma_p", p.sigma_p);
        p.g_ratio = get_or(d, dp, "g_ratio", p.g_ratio);
        p.goal_radius = get_or(d, dp, "goal_radius", p.goal_radius);
        p.step_penalty = get_or(d, dp, "step_penalty", p.step_penalty);
        p.max_steps = get_or(d, dp, "max_steps", p.max_steps);
        p.discount = get_or(d, dp, "discount", p.discount);
        const std::string sign = get_or<std::string>(d, dp, "sign_mode", "main_text");
        if (sign == "main_text") p.sign_mode = envs::DrivingSignMode::main_text;
        else if (sign == "appendix") p.sign_mode = envs::DrivingSignMode::appendix;
        else fail(dp + ".sign_mode", "must be 'main_text' or 'appendix'");
        const std::string rm = get_or<std::string>(d, dp, "reward_mode", "step_penalty");
        if (rm == "step_penalty") p.reward_mode = envs::DrivingRewardMode::step_penalty;
        else if (rm == "pv_product") p.reward_mode = envs::DrivingRewardMode::pv_product;
        else if (rm == "terminal_quadratic")
            p.reward_mode = envs::DrivingRewardMode::terminal_quadratic;
        else fail(dp + ".reward_mode", "must be step_penalty | pv_product | terminal_quadratic");
        p.validate();
    }

    if (j.contains("cartpole")) {
        const auto& c = j.at("cartpole");
        const std::string cp = path + ".cartpole";
        require_keys(c, cp, {"family", "max_steps", "discount", "dt"});
        cfg.family = envs::reward_family_from_name(get_or<std::string>(c, cp, "family", "original"));
        cfg.cartpole.max_steps = get_or(c, cp, "max_steps", cfg.cartpole.max_steps);
        cfg.cartpole.discount = get_or(c, cp, "discount", cfg.cartpole.discount);
        cfg.cartpole.dt = get_or(c, cp, "dt", cfg.cartpole.dt);
    }

    if (j.contains("noise_inject")) {
        const auto& n = j.at("noise_inject");
        const std::string np = path + ".noise_inject";
        require_keys(n, np, {"r_noise", "pair_corr", "pairs"});
        envs::NoiseInjectConfig nc;
        nc.r_noise = get_or(n, np, "r_noise", 0.0);
        nc.pair_corr = get_or(n, np, "pair_corr", 0.0);
        if (n.contains("pairs")) nc.pairs = parse_pairs(n.at("pairs"), np + ".pairs");
        cfg.noise = std::move(nc);
    }

    if (j.contains("reward_augment")) {
        const auto& a = j.at("reward_augment");
        const std::string ap = path + ".reward_augment";
        require_keys(a, ap, {"r_reward", "pairs", "norm_bounds"});
        envs::RewardAugmentConfig ac;
        ac.r_reward = get_or(a, ap, "r_reward", 0.0);
        if (a.contains("pairs")) ac.pairs = parse_pairs(a.at("pairs"), ap + ".pairs");
        if (a.contains("norm_bounds")) {
            for (const auto& b : a.at("norm_bounds")) {
                if (!b.is_array() || b.size() != 2) fail(ap + ".norm_bounds", "entries are [lo, hi]");
                ac.norm_bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
            }
        }
        cfg.augment = std::move(ac);
    }
    return cfg;
}

ModelConfig parse_model(const json& j, const std::string& path) {
    require_keys(j, path,
                 {"mean", "scales", "grid", "corr_window", "corr_shrink", "corr_update_every"});
    ModelConfig cfg;
    const std::string mean = get_or<std::string>(j, path, "mean", "tabular_conditional");
    if (mean == "linear_least_squares") cfg.mean_kind = models::MeanKind::linear_least_squares;
    else if (mean == "tabular_conditional") cfg.mean_kind = models::MeanKind::tabular_conditional;
    else fail(path + ".mean", "must be linear_least_squares | tabular_conditional");
    const std::string scales = get_or<std::string>(j, path, "scales", "homoscedastic");
    if (scales == "homoscedastic") cfg.scale_kind = models::ScaleKind::homoscedastic;
    else if (scales == "state_proportional") cfg.scale_kind = models::ScaleKind::state_proportional;
    else fail(path + ".scales", "must be homoscedastic | state_proportional");
    if (j.contains("grid")) cfg.grid = parse_grid(j.at("grid"), path + ".grid");
    cfg.corr_window = get_or(j, path, "corr_window", cfg.corr_window);
    cfg.corr_shrink = get_or(j, path, "corr_shrink", cfg.corr_shrink);
    cfg.corr_update_every = get_or(j, path, "corr_update_every", cfg.corr_update_every);
    return cfg;
}

LoopConfig parse_loop(const json& j, const std::string& path) {
    require_keys(j, path,
                 {"epochs", "env_steps", "rollouts", "updates", "rollout_k", "q_learning_rate",
                  "eps0", "eps_decay", "eps_floor", "eval_episodes", "final_eval_episodes"});
    LoopConfig cfg;
    cfg.epochs = get_or(j, path, "epochs", cfg.epochs);
    cfg.env_steps = get_or(j, path, "env_steps", cfg.env_steps);
    cfg.rollouts = get_or(j, path, "rollouts", cfg.rollouts);
    cfg.updates = get_or(j, path, "updates", cfg.updates);
    cfg.rollout_k = get_or(j, path, "rollout_k", cfg.rollout_k);
    cfg.q_learning_rate = get_or(j, path, "q_learning_rate", cfg.q_learning_rate);
    cfg.eps0 = get_or(j, path, "eps0", cfg.eps0);
    cfg.eps_decay = get_or(j, path, "eps_decay", cfg.eps_decay);
    cfg.eps_floor = get_or(j, path, "eps_floor", cfg.eps_floor);
    cfg.eval_episodes = get_or(j, path, "eval_episodes", cfg.eval_episodes);
    cfg.final_eval_episodes = get_or(j, path, "final_eval_episodes", cfg.final_eval_episodes);
    return cfg;
}

PlanningConfig parse_planning(const json& j, const std::string& path) {
    require_keys(j, path, {"grid", "n_mc", "vi_tol", "vi_max_iters", "one_step", "eval_episodes"});
    PlanningConfig cfg;
    if (j.contains("grid")) cfg.grid = parse_grid(j.at("grid"), path + ".grid");
    cfg.n_mc = get_or(j, path, "n_mc", cfg.n_mc);
    cfg.vi_tol = get_or(j, path, "vi_tol", cfg.vi_tol);
    cfg.vi_max_iters = get_or(j, path, "vi_max_iters", cfg.vi_max_iters);
    cfg.one_step = get_or(j, path, "one_step", cfg.one_step);
    cfg.eval_episodes = get_or(j, path, "eval_episodes", cfg.eval_episodes);
    return cfg;
}

SweepConfig parse_sweep(const json& j, const std::string& path) {
    require_keys(j, path, {"axis", "values"});
    SweepConfig cfg;
    cfg.axis = get_or<std::string>(j, path, "axis", "");
    if (cfg.axis != "reward_coef" && cfg.axis != "corr_coef" && cfg.axis != "noise_coef")
        fail(path + ".axis", "must be reward_coef | corr_coef | noise_coef");
    cfg.values = get_or<std::vector<double>>(j, path, "values", {});
    return cfg;
}

}  // namespace

void ExperimentConfig::validate() const {
    static const std::set<std::string> kExperiments{"visual_region", "reward_families",
                                                    "model_compare", "sweep", "theory_report"};
    if (!kExperiments.count(experiment))
        throw std::invalid_argument("config: experiment: unknown experiment '" + experiment + "'");
    if (experiment != "theory_report" && seeds.empty())
        throw std::invalid_argument("config: seeds: must be nonempty");
    if (experiment == "visual_region") {
        if (env.name != "driving")
            throw std::invalid_argument("config: visual_region requires env.name = driving");
        if (!planning.grid)
            throw std::invalid_argument("config: visual_region requires planning.grid");
    }
    if (experiment == "reward_families" && env.name != "cartpole_lite")
        throw std::invalid_argument("config: reward_families requires env.name = cartpole_lite");
    if (experiment == "model_compare" && !env.noise)
        throw std::invalid_argument("config: model_compare requires env.noise_inject");
    if (experiment == "sweep" && sweep.values.empty())
        throw std::invalid_argument("config: sweep.values must be nonempty");
    if ((experiment == "model_compare" || experiment == "reward_families" ||
         experiment == "sweep")) {
        if (model.mean_kind == models::MeanKind::tabular_conditional && !model.grid)
            throw std::invalid_argument("config: tabular_conditional mean requires model.grid");
    }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    require_keys(j, "<root>",
                 {"experiment", "seeds", "output_dir", "env", "model", "loop", "planning", "sweep",
                  "theory_mc"});
    ExperimentConfig cfg;
    if (!j.contains("experiment")) fail("<root>", "missing 'experiment'");
    cfg.experiment = j.at("experiment").get<std::string>();
    cfg.seeds = get_or<std::vector<std::uint64_t>>(j, "<root>", "seeds", {});
    cfg.output_dir = get_or<std::string>(j, "<root>", "output_dir", "out");
    if (j.contains("env")) cfg.env = parse_env(j.at("env"), "env");
    if (j.contains("model")) cfg.model = parse_model(j.at("model"), "model");
    if (j.contains("loop")) cfg.loop = parse_loop(j.at("loop"), "loop");
    if (j.contains("planning")) cfg.planning = parse_planning(j.at("planning"), "planning");
    if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"), "sweep");
    cfg.theory_mc = get_or(j, "<root>", "theory_mc", cfg.theory_mc);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

envs::EnvPtr make_env(const EnvConfig& cfg, std::uint64_t calibration_seed) {
    if (cfg.name == "cartpole_lite") {
        envs::NoiseInjectConfig noise = cfg.noise.value_or(envs::NoiseInjectConfig{});
        return std::make_shared<envs::CartPoleLiteEnv>(
            envs::RewardFamily::make(cfg.family), noise, cfg.cartpole, calibration_seed);
    }
    envs::EnvPtr env = std::make_shared<envs::DrivingEnv>(cfg.driving);
    if (cfg.noise || cfg.augment) {
        envs::NoiseInjectConfig noise = cfg.noise.value_or(envs::NoiseInjectConfig{});
        if (cfg.noise && noise.pairs.empty()) noise.pairs = {{0, 1}};
        envs::RewardAugmentConfig augment = cfg.augment.value_or(envs::RewardAugmentConfig{});
        if (cfg.augment && augment.pairs.empty()) augment.pairs = {{0, 1}};
        env = std::make_shared<envs::WrappedEnv>(env, noise, augment, calibration_seed);
    }
    return env;
}

}  // namespace inslab::cli
