#pragma once

#include "inslab/planning/grid.hpp"
#include "inslab/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace inslab::planning {

// Transition row stored either as an explicit sparse distribution or as a
// product of per-dimension marginals (the laggedized form). Factored rows
// never materialize the joint; expectations contract dimension by dimension.
struct SparseRow {
    std::vector<std::int32_t> idx;
    std::vector<double> prob;
};

struct FactoredRow {
    // scaled_idx[d][t] = per-dimension cell index * grid stride(d)
    std::vector<std::vector<std::int32_t>> scaled_idx;
    std::vector<std::vector<double>> prob;
    std::int32_t base = 0;  // offset of the next-state block (one-step MDPs)
};

using TransitionRow = std::variant<SparseRow, FactoredRow>;

using TabularPolicy = std::vector<int>;

double row_sum(const TransitionRow& row);
double row_expectation(const TransitionRow& row, const double* table);
std::vector<std::pair<std::int32_t, double>> expand_row(const TransitionRow& row);
std::int32_t sample_row(const TransitionRow& row, RngStream& rng);

// Finite MDP with per-(state,action) transition rows and expected rewards.
// When the reward is mediated by the next state, `next_state_reward` holds
// r(s') per state and `reward` keeps the invariant
//   reward[s][a] = action_reward[s][a] + E_row[r(s')],
// which laggedize re-establishes after replacing the rows.
class TabularMDP {
public:
    TabularMDP(int n_states, int n_actions, double gamma);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    double gamma() const { return gamma_; }

    bool is_terminal(int s) const { return terminal_[static_cast<std::size_t>(s)] != 0; }
    void set_terminal(int s, bool t) { terminal_[static_cast<std::size_t>(s)] = t ? 1 : 0; }

    const TransitionRow& row(int s, int a) const { return rows_[slot(s, a)]; }
    void set_row(int s, int a, TransitionRow row) { rows_[slot(s, a)] = std::move(row); }

    double reward(int s, int a) const { return reward_[slot(s, a)]; }
    double action_reward(int s, int a) const { return action_reward_[slot(s, a)]; }
    void set_action_reward(int s, int a, double r) { action_reward_[slot(s, a)] = r; }

    const std::optional<std::vector<double>>& next_state_reward() const {
        return next_state_reward_;
    }
    void set_next_state_reward(std::vector<double> r);

    // Recomputes reward[s][a] from action_reward and next_state_reward.
    void refresh_rewards();

    // Offset of the next-state block for one-step MDPs (0 otherwise).
    int next_offset() const { return next_offset_; }
    void set_next_offset(int off) { next_offset_ = off; }

    // Probabilities nonnegative, every non-terminal row sums to 1 within
    // 1e-9, rewards finite. Throws with a diagnostic otherwise.
    void validate() const;

    std::size_t slot(int s, int a) const {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) +
               static_cast<std::size_t>(a);
    }

private:
    int n_states_;
    int n_actions_;
    double gamma_;
    std::vector<TransitionRow> rows_;
    std::vector<double> reward_;
    std::vector<double> action_reward_;
    std::optional<std::vector<double>> next_state_reward_;
    std::vector<std::uint8_t> terminal_;
    int next_offset_ = 0;
};

// Copy of `mdp` with a different next-state reward vector (rewards refreshed).
TabularMDP with_next_state_reward(const TabularMDP& mdp, std::vector<double> r_next);

struct QTable {
    int n_actions = 0;
    std::vector<double> values;  // [s * n_actions + a]

    double at(int s, int a) const {
        return values[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                      static_cast<std::size_t>(a)];
    }
    // Greedy action, lowest index wins ties.
    int greedy(int s) const;
};

struct VIResult {
    QTable q;
    std::vector<double> v;
    std::vector<int> policy;
    int iterations = 0;
    double residual = 0.0;
};

struct VIOptions {
    double tol = 1e-9;
    int max_iterations = 100000;
};

// Jacobi value iteration to sup-norm residual < tol; throws with a residual
// report if the iteration cap is hit first.
VIResult value_iteration(const TabularMDP& mdp, const VIOptions& opts = {});

// V^pi by fixed-policy sweeps to `tol` (exact up to tolerance; single sweep
// suffices for one-step MDPs).
std::vector<double> exact_policy_value(const TabularMDP& mdp, const std::vector<int>& policy,
                                       double tol = 1e-13, int max_iterations = 1000000);

}  // namespace inslab::planning
