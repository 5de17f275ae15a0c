#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>

namespace inslab::cli {

struct TheoryReport {
    nlohmann::json json;
    bool all_pass = false;
};

// Runs the numerical verification suite for the integral identities, the
// G-decomposition theorem, the alpha/beta machinery on the two-bit MDP, the
// D_R construction, the beta = 0 regime on the factored MDP, the driving
// region closed form, and the compound-noise covariances.
TheoryReport run_theory_report(int n_mc, std::uint64_t seed);

}  // namespace inslab::cli
