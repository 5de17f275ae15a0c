#pragma once

#include "inslab/envs/cartpole_lite.hpp"
#include "inslab/envs/driving.hpp"
#include "inslab/envs/wrappers.hpp"
#include "inslab/models.hpp"
#include "inslab/planning/grid.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace inslab::cli {

struct EnvConfig {
    std::string name = "driving";  // driving | cartpole_lite
    envs::DrivingParams driving;
    envs::CartPoleLiteParams cartpole;
    envs::RewardFamilyTag family = envs::RewardFamilyTag::Original;
    std::optional<envs::NoiseInjectConfig> noise;
    std::optional<envs::RewardAugmentConfig> augment;
};

struct ModelConfig {
    models::MeanKind mean_kind = models::MeanKind::tabular_conditional;
    models::ScaleKind scale_kind = models::ScaleKind::homoscedastic;
    std::optional<planning::Grid> grid;
    int corr_window = 2000;
    double corr_shrink = 0.05;
    int corr_update_every = 1;
};

struct LoopConfig {
    int epochs = 20;
    int env_steps = 400;
    int rollouts = 100;
    int updates = 2000;
    int rollout_k = 5;
    double q_learning_rate = 0.1;
    double eps0 = 0.5;
    double eps_decay = 0.99;
    double eps_floor = 0.05;
    int eval_episodes = 10;
    int final_eval_episodes = 40;
};

struct PlanningConfig {
    std::optional<planning::Grid> grid;
    int n_mc = 200;
    double vi_tol = 1e-8;
    int vi_max_iters = 100000;
    bool one_step = false;
    int eval_episodes = 100;
};

struct SweepConfig {
    std::string axis;  // reward_coef | corr_coef | noise_coef
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string experiment;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_dir;
    EnvConfig env;
    ModelConfig model;
    LoopConfig loop;
    PlanningConfig planning;
    SweepConfig sweep;
    int theory_mc = 200000;

    void validate() const;  // semantic checks per experiment
};

// Strict parse: unknown keys anywhere are rejected with a path-qualified
// message; type errors carry the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Builds the configured environment (wrappers applied, calibration frozen).
envs::EnvPtr make_env(const EnvConfig& cfg, std::uint64_t calibration_seed = 0);

}  // namespace inslab::cli
