#pragma once

#include "inslab/cli/config.hpp"
#include "inslab/planning/planner.hpp"
#include "inslab/planning/train_loop.hpp"

#include <string>
#include <vector>

namespace inslab::cli {

// Figure-2 / Table-2 style experiment: exact planning on the discretized
// driving MDP vs its laggedized counterpart — policy maps, the analytic
// region band, and episodic metrics for both planned policies.
struct VisualRegionResult {
    planning::RegionBounds region;
    std::vector<planning::PolicyMap> maps_true;    // per seed
    std::vector<planning::PolicyMap> maps_lagged;  // per seed
    std::vector<planning::EpisodeMetrics> metrics_true;
    std::vector<planning::EpisodeMetrics> metrics_lagged;
};

VisualRegionResult run_visual_region(const ExperimentConfig& cfg);

// Figure-4 style experiment: train_loop in both model modes on the
// noise-injected environment; per-epoch returns and likelihood losses plus
// final-model evaluations on a seed-shared evaluation dataset.
struct ModeRunLog {
    models::ModelMode mode = models::ModelMode::lagged;
    std::uint64_t seed = 0;
    std::vector<planning::EpochLog> curve;
    double final_return = 0.0;
    double final_ll = 0.0;
    std::vector<double> marginal_ll;
    Eigen::MatrixXd final_corr;
};

struct ModelCompareResult {
    std::vector<ModeRunLog> runs;  // ordered: seeds x {instantaneous, lagged}
};

ModelCompareResult run_model_compare(const ExperimentConfig& cfg);

// Figure-3 style experiment: all six reward families on CartPoleLite, both
// model modes, INS-LAG gap per family.
struct FamilyRunLog {
    std::string family;
    models::ModelMode mode = models::ModelMode::lagged;
    std::uint64_t seed = 0;
    double final_return = 0.0;
};

struct FamilyGap {
    std::string family;
    double ins_mean = 0.0;
    double lag_mean = 0.0;
    double gap = 0.0;
};

struct RewardFamiliesResult {
    std::vector<FamilyRunLog> runs;
    std::vector<FamilyGap> gaps;  // family order: original, A..E
};

RewardFamiliesResult run_reward_families(const ExperimentConfig& cfg);

// Figure-5 style one-axis sweep with the (INS - LAG)/LAG advantage.
struct SweepRow {
    double value = 0.0;
    double ins_mean = 0.0;
    double lag_mean = 0.0;
    double advantage = 0.0;
};

struct SweepResult {
    std::string axis;
    std::vector<FamilyRunLog> runs;  // family field holds the formatted value
    std::vector<SweepRow> rows;
};

SweepResult run_sweep(const ExperimentConfig& cfg);

// Dispatch by cfg.experiment; writes outputs under cfg.output_dir.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace inslab::cli
