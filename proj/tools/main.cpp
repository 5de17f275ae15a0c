#include "inslab/cli/config.hpp"
#include "inslab/cli/experiments.hpp"
#include "inslab/cli/theory_report.hpp"

#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inslab: lagged vs instantaneous environment models, desk scale"};
    app.require_subcommand(1);

    std::string run_config;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", run_config, "JSON config file")->required();

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "validate a config file and exit");
    validate->add_option("config", validate_config, "JSON config file")->required();

    std::string report_out;
    int report_mc = 200000;
    std::uint64_t report_seed = 0;
    auto* report = app.add_subcommand("theory-report", "run the numerical theory checks");
    report->add_option("--out", report_out, "write the JSON report here (default stdout)");
    report->add_option("--n-mc", report_mc, "Monte-Carlo samples per integral check");
    report->add_option("--seed", report_seed, "root seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            inslab::cli::load_config(validate_config);
            std::cout << "ok\n";
            return kOk;
        }
        if (run->parsed()) {
            inslab::cli::ExperimentConfig cfg;
            try {
                cfg = inslab::cli::load_config(run_config);
            } catch (const std::invalid_argument& e) {
                std::cerr << e.what() << '\n';
                return kValidationError;
            }
            inslab::cli::run_experiment(cfg);
            return kOk;
        }
        if (report->parsed()) {
            const auto result = inslab::cli::run_theory_report(report_mc, report_seed);
            if (report_out.empty()) {
                std::cout << result.json.dump(2) << '\n';
            } else {
                std::filesystem::create_directories(
                    std::filesystem::path(report_out).parent_path());
                std::ofstream os(report_out);
                os << result.json.dump(2) << '\n';
            }
            return result.all_pass ? kOk : kRuntimeError;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
