#include "inslab/cli/config.hpp"
#include "inslab/cli/experiments.hpp"
#include "inslab/cli/theory_report.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace inslab;
using namespace inslab::cli;
using nlohmann::json;

namespace {

json tiny_region_config(const std::string& outdir) {
    return json{
        {"experiment", "visual_region"},
        {"seeds", {0, 1}},
        {"output_dir", outdir},
        {"env",
         {{"name", "driving"},
          {"driving",
           {{"g_ratio", 1.0}, {"sign_mode", "appendix"}, {"reward_mode", "pv_product"}}}}},
        {"planning",
         {{"grid", {{-2, 2, 12}, {-2, 2, 12}}}, {"n_mc", 400}, {"one_step", true},
          {"eval_episodes", 4}}}};
}

json tiny_compare_config(const std::string& outdir) {
    return json{{"experiment", "model_compare"},
                {"seeds", {0}},
                {"output_dir", outdir},
                {"env",
                 {{"name", "driving"},
                  {"driving", {{"sigma_v", 0.0}, {"max_steps", 50}}},
                  {"noise_inject", {{"r_noise", 0.4}, {"pair_corr", 0.9}}}}},
                {"model", {{"grid", {{-2, 2, 8}, {-2, 2, 8}}}}},
                {"loop",
                 {{"epochs", 3},
                  {"env_steps", 150},
                  {"rollouts", 20},
                  {"updates", 300},
                  {"eval_episodes", 2},
                  {"final_eval_episodes", 4}}}};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config validation") {
    SUBCASE("unknown keys are rejected with their path") {
        auto j = tiny_region_config("out_x");
        j["typo_key"] = 1;
        CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("typo_key"),
                             std::invalid_argument);
        auto j2 = tiny_region_config("out_x");
        j2["env"]["driving"]["sigma"] = 1.0;  // misspelled sigma_v
        CHECK_THROWS_WITH_AS(parse_config(j2), doctest::Contains("env.driving"),
                             std::invalid_argument);
    }
    SUBCASE("experiment-specific requirements") {
        auto j = tiny_region_config("out_x");
        j["env"]["name"] = "cartpole_lite";
        j["env"].erase("driving");
        CHECK_THROWS_AS(parse_config(j), std::invalid_argument);

        json mc = tiny_compare_config("out_x");
        mc["env"].erase("noise_inject");
        CHECK_THROWS_AS(parse_config(mc), std::invalid_argument);
    }
    SUBCASE("seeds must be nonempty") {
        auto j = tiny_region_config("out_x");
        j["seeds"] = json::array();
        CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
    }
    SUBCASE("bad enum values name the key") {
        auto j = tiny_region_config("out_x");
        j["env"]["driving"]["sign_mode"] = "sideways";
        CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("sign_mode"),
                             std::invalid_argument);
    }
}

TEST_CASE("visual_region experiment outputs") {
    const std::string outdir = "test_out/region";
    std::filesystem::remove_all(outdir);
    const auto cfg = parse_config(tiny_region_config(outdir));
    const auto result = run_visual_region(cfg);

    SUBCASE("region JSON carries the closed form") {
        CHECK(result.region.upper == doctest::Approx(-1.1));
        CHECK(result.region.lower == doctest::Approx(-2.2));
        json j;
        std::ifstream is(std::filesystem::path(outdir) / "region.json");
        is >> j;
        CHECK(j.at("upper").get<double>() == doctest::Approx(-1.1));
    }
    SUBCASE("metrics CSV has one row per model mode per seed plus aggregates") {
        const auto text = slurp(std::filesystem::path(outdir) / "metrics.csv");
        // header + 2 seeds x 2 models + 2 aggregate rows
        CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 + 2);
        CHECK(text.find("aggregate") != std::string::npos);
    }
    SUBCASE("maps exist per seed") {
        CHECK(std::filesystem::exists(std::filesystem::path(outdir) / "policy_map_true_seed0.csv"));
        CHECK(std::filesystem::exists(std::filesystem::path(outdir) /
                                      "policy_map_lagged_seed1.csv"));
    }
}

TEST_CASE("zero-noise region config yields identical policy maps") {
    const std::string outdir = "test_out/region_zero";
    std::filesystem::remove_all(outdir);
    auto j = tiny_region_config(outdir);
    j["env"]["driving"]["sigma_v"] = 0.0;
    j["env"]["driving"]["g_ratio"] = 0.0;
    j["seeds"] = {0};
    const auto result = run_visual_region(parse_config(j));
    CHECK(result.maps_true[0].actions == result.maps_lagged[0].actions);
    CHECK(result.region.width() == doctest::Approx(0.0));
}

TEST_CASE("experiments are byte-deterministic given (config, seeds)") {
    const std::string out1 = "test_out/det1", out2 = "test_out/det2";
    std::filesystem::remove_all(out1);
    std::filesystem::remove_all(out2);
    auto j1 = tiny_compare_config(out1);
    auto j2 = tiny_compare_config(out2);
    run_model_compare(parse_config(j1));
    run_model_compare(parse_config(j2));
    for (const char* name : {"returns.csv", "likelihood.csv", "corr.csv", "final.csv"}) {
        CHECK(slurp(std::filesystem::path(out1) / name) ==
              slurp(std::filesystem::path(out2) / name));
    }
}

TEST_CASE("model_compare curves: N rows per mode, lagged corr logged as identity") {
    const std::string outdir = "test_out/compare";
    std::filesystem::remove_all(outdir);
    const auto cfg = parse_config(tiny_compare_config(outdir));
    const auto result = run_model_compare(cfg);
    REQUIRE(result.runs.size() == 2);
    for (const auto& run : result.runs) {
        CHECK(run.curve.size() == 3);
        if (run.mode == models::ModelMode::lagged)
            for (const auto& e : run.curve) CHECK(e.corr(0, 1) == 0.0);
    }
}

TEST_CASE("sweep echoes values and the advantage column is (ins-lag)/lag") {
    const std::string outdir = "test_out/sweep";
    std::filesystem::remove_all(outdir);
    json j = tiny_compare_config(outdir);
    j["experiment"] = "sweep";
    j["sweep"] = {{"axis", "noise_coef"}, {"values", {0.0, 0.4}}};
    const auto cfg = parse_config(j);
    const auto result = run_sweep(cfg);
    REQUIRE(result.rows.size() == 2);
    CHECK(result.rows[0].value == 0.0);
    CHECK(result.rows[1].value == 0.4);
    for (const auto& row : result.rows) {
        if (row.lag_mean != 0.0)
            CHECK(row.advantage ==
                  doctest::Approx((row.ins_mean - row.lag_mean) / row.lag_mean));
    }
    const auto text = slurp(std::filesystem::path(outdir) / "advantage.csv");
    CHECK(text.find("0.40000000000000002") != std::string::npos);
}

TEST_CASE("reward_families emits all six families") {
    const std::string outdir = "test_out/families";
    std::filesystem::remove_all(outdir);
    json j{{"experiment", "reward_families"},
           {"seeds", {0}},
           {"output_dir", outdir},
           {"env",
            {{"name", "cartpole_lite"},
             {"cartpole", {{"family", "C"}, {"max_steps", 40}}},
             {"noise_inject", {{"r_noise", 0.05}, {"pair_corr", 0.5}}}}},
           {"model",
            {{"grid", {{-1, 1, 3}, {-2, 2, 3}, {-0.21, 0.21, 3}, {-2, 2, 3}}},
             {"mean", "linear_least_squares"}}},
           {"loop",
            {{"epochs", 2},
             {"env_steps", 80},
             {"rollouts", 10},
             {"updates", 100},
             {"eval_episodes", 2},
             {"final_eval_episodes", 2}}}};
    const auto result = run_reward_families(parse_config(j));
    REQUIRE(result.gaps.size() == 6);
    CHECK(result.gaps[0].family == "original");
    CHECK(result.gaps[5].family == "E");
    CHECK(result.runs.size() == 12);
    const auto text = slurp(std::filesystem::path(outdir) / "gaps.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("theory report smoke: all checks pass at reduced n_mc") {
    const auto report = run_theory_report(20000, 0);
    CHECK(report.all_pass);
    CHECK(report.json.at("checks").size() >= 9);
}
