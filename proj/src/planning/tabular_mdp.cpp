#include "inslab/planning/tabular_mdp.hpp"

#include "inslab/kernels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace inslab::planning {

namespace {

double factored_expectation(const FactoredRow& row, std::size_t d, std::int32_t base,
                            const double* table) {
    const auto& idx = row.scaled_idx[d];
    const auto& p = row.prob[d];
    if (d + 1 == row.scaled_idx.size())
        return kernels::gather_dot(p.data(), idx.data(), idx.size(), table + base);
    double acc = 0.0;
    for (std::size_t t = 0; t < idx.size(); ++t)
        acc += p[t] * factored_expectation(row, d + 1, base + idx[t], table);
    return acc;
}

}  // namespace

double row_sum(const TransitionRow& row) {
    if (const auto* s = std::get_if<SparseRow>(&row))
        return kernels::sum(s->prob.data(), s->prob.size());
    const auto& f = std::get<FactoredRow>(row);
    double total = 1.0;
    for (const auto& p : f.prob) total *= kernels::sum(p.data(), p.size());
    return total;
}

double row_expectation(const TransitionRow& row, const double* table) {
    if (const auto* s = std::get_if<SparseRow>(&row))
        return kernels::gather_dot(s->prob.data(), s->idx.data(), s->idx.size(), table);
    const auto& f = std::get<FactoredRow>(row);
    return factored_expectation(f, 0, f.base, table);
}

std::vector<std::pair<std::int32_t, double>> expand_row(const TransitionRow& row) {
    std::vector<std::pair<std::int32_t, double>> out;
    if (const auto* s = std::get_if<SparseRow>(&row)) {
        out.reserve(s->idx.size());
        for (std::size_t i = 0; i < s->idx.size(); ++i) out.emplace_back(s->idx[i], s->prob[i]);
        return out;
    }
    const auto& f = std::get<FactoredRow>(row);
    out.emplace_back(f.base, 1.0);
    for (std::size_t d = 0; d < f.scaled_idx.size(); ++d) {
        std::vector<std::pair<std::int32_t, double>> next;
        next.reserve(out.size() * f.scaled_idx[d].size());
        for (const auto& [idx, p] : out)
            for (std::size_t t = 0; t < f.scaled_idx[d].size(); ++t)
                next.emplace_back(idx + f.scaled_idx[d][t], p * f.prob[d][t]);
        out = std::move(next);
    }
    return out;
}

std::int32_t sample_row(const TransitionRow& row, RngStream& rng) {
    if (const auto* s = std::get_if<SparseRow>(&row)) {
        double u = rng.uniform() * row_sum(row);
        for (std::size_t i = 0; i < s->idx.size(); ++i) {
            u -= s->prob[i];
            if (u <= 0.0) return s->idx[i];
        }
        return s->idx.back();
    }
    const auto& f = std::get<FactoredRow>(row);
    std::int32_t idx = f.base;
    for (std::size_t d = 0; d < f.scaled_idx.size(); ++d) {
        double u = rng.uniform() * kernels::sum(f.prob[d].data(), f.prob[d].size());
        std::size_t pick = f.scaled_idx[d].size() - 1;
        for (std::size_t t = 0; t < f.scaled_idx[d].size(); ++t) {
            u -= f.prob[d][t];
            if (u <= 0.0) {
                pick = t;
                break;
            }
        }
        idx += f.scaled_idx[d][pick];
    }
    return idx;
}

TabularMDP::TabularMDP(int n_states, int n_actions, double gamma)
    : n_states_(n_states), n_actions_(n_actions), gamma_(gamma) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("TabularMDP: need at least one state and action");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("TabularMDP: gamma outside [0,1]");
    const std::size_t slots =
        static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions);
    rows_.assign(slots, SparseRow{});
    reward_.assign(slots, 0.0);
    action_reward_.assign(slots, 0.0);
    terminal_.assign(static_cast<std::size_t>(n_states), 0);
}

void TabularMDP::set_next_state_reward(std::vector<double> r) {
    if (r.size() != static_cast<std::size_t>(n_states_))
        throw std::invalid_argument("TabularMDP: next_state_reward must cover all states");
    next_state_reward_ = std::move(r);
}

void TabularMDP::refresh_rewards() {
    for (int s = 0; s < n_states_; ++s) {
        if (is_terminal(s)) continue;
        for (int a = 0; a < n_actions_; ++a) {
            double r = action_reward_[slot(s, a)];
            if (next_state_reward_) r += row_expectation(rows_[slot(s, a)], next_state_reward_->data());
            reward_[slot(s, a)] = r;
        }
    }
}

void TabularMDP::validate() const {
    for (int s = 0; s < n_states_; ++s) {
        if (is_terminal(s)) continue;
        for (int a = 0; a < n_actions_; ++a) {
            const auto& row = rows_[slot(s, a)];
            const auto entries = expand_row(row);
            if (entries.empty()) {
                std::ostringstream os;
                os << "TabularMDP: empty row at state " << s << " action " << a;
                throw std::runtime_error(os.str());
            }
            double total = 0.0;
            for (const auto& [idx, p] : entries) {
                if (idx < 0 || idx >= n_states_) {
                    std::ostringstream os;
                    os << "TabularMDP: row (" << s << "," << a << ") points at state " << idx;
                    throw std::runtime_error(os.str());
                }
                if (p < 0.0) {
                    std::ostringstream os;
                    os << "TabularMDP: negative probability at (" << s << "," << a << ")";
                    throw std::runtime_error(os.str());
                }
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) {
                std::ostringstream os;
                os << "TabularMDP: row (" << s << "," << a << ") sums to " << total;
                throw std::runtime_error(os.str());
            }
            if (!std::isfinite(reward_[slot(s, a)]))
                throw std::runtime_error("TabularMDP: non-finite reward");
        }
    }
}

TabularMDP with_next_state_reward(const TabularMDP& mdp, std::vector<double> r_next) {
    TabularMDP out = mdp;
    out.set_next_state_reward(std::move(r_next));
    out.refresh_rewards();
    return out;
}

int QTable::greedy(int s) const {
    int best = 0;
    double best_q = at(s, 0);
    for (int a = 1; a < n_actions; ++a) {
        const double q = at(s, a);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

VIResult value_iteration(const TabularMDP& mdp, const VIOptions& opts) {
    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    std::vector<double> v(static_cast<std::size_t>(S), 0.0);
    std::vector<double> v_next(static_cast<std::size_t>(S), 0.0);
    QTable q{A, std::vector<double>(static_cast<std::size_t>(S) * static_cast<std::size_t>(A), 0.0)};
    const double gamma = mdp.gamma();

    double residual = 0.0;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        residual = 0.0;
        for (int s = 0; s < S; ++s) {
            if (mdp.is_terminal(s)) {
                v_next[static_cast<std::size_t>(s)] = 0.0;
                continue;
            }
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const double qa =
                    mdp.reward(s, a) + gamma * row_expectation(mdp.row(s, a), v.data());
                q.values[mdp.slot(s, a)] = qa;
                if (qa > best) best = qa;
            }
            v_next[static_cast<std::size_t>(s)] = best;
            residual = std::max(residual, std::abs(best - v[static_cast<std::size_t>(s)]));
        }
        std::swap(v, v_next);
        if (residual < opts.tol) break;
    }
    if (residual >= opts.tol) {
        std::ostringstream os;
        os << "value_iteration: no convergence after " << opts.max_iterations
           << " iterations (residual " << residual << ", tol " << opts.tol << ")";
        throw std::runtime_error(os.str());
    }

    // One more Q refresh against the converged V, then extract the policy.
    std::vector<int> policy(static_cast<std::size_t>(S), 0);
    for (int s = 0; s < S; ++s) {
        if (mdp.is_terminal(s)) continue;
        for (int a = 0; a < A; ++a)
            q.values[mdp.slot(s, a)] =
                mdp.reward(s, a) + gamma * row_expectation(mdp.row(s, a), v.data());
        policy[static_cast<std::size_t>(s)] = q.greedy(s);
    }
    return VIResult{std::move(q), std::move(v), std::move(policy), iter + 1, residual};
}

std::vector<double> exact_policy_value(const TabularMDP& mdp, const std::vector<int>& policy,
                                       double tol, int max_iterations) {
    const int S = mdp.n_states();
    if (policy.size() != static_cast<std::size_t>(S))
        throw std::invalid_argument("exact_policy_value: policy size mismatch");
    std::vector<double> v(static_cast<std::size_t>(S), 0.0);
    std::vector<double> v_next(static_cast<std::size_t>(S), 0.0);
    const double gamma = mdp.gamma();
    for (int iter = 0; iter < max_iterations; ++iter) {
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            if (mdp.is_terminal(s)) {
                v_next[static_cast<std::size_t>(s)] = 0.0;
                continue;
            }
            const int a = policy[static_cast<std::size_t>(s)];
            const double val = mdp.reward(s, a) + gamma * row_expectation(mdp.row(s, a), v.data());
            residual = std::max(residual, std::abs(val - v[static_cast<std::size_t>(s)]));
            v_next[static_cast<std::size_t>(s)] = val;
        }
        std::swap(v, v_next);
        if (residual < tol) return v;
    }
    throw std::runtime_error("exact_policy_value: no convergence");
}

}  // namespace inslab::planning
