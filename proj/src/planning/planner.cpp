#include "inslab/planning/planner.hpp"

#include "inslab/csv.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace inslab::planning {

TabularMDP discretize(const envs::Env& env, const Grid& grid, int n_mc, RngStream& rng,
                      const DiscretizeOptions& opts) {
    if (n_mc < 1) throw std::invalid_argument("discretize: n_mc must be >= 1");
    if (env.state_dim() != grid.dims())
        throw std::invalid_argument("discretize: grid dimension != env state dimension");
    if (opts.outcome_grid && !opts.one_step)
        throw std::invalid_argument("discretize: outcome_grid requires one_step mode");
    const int n_cells = grid.size();
    const int n_actions = env.n_actions();
    const Grid& out_grid = opts.outcome_grid ? *opts.outcome_grid : grid;
    const int n_out = opts.one_step ? out_grid.size() : n_cells;
    const int n_states = opts.one_step ? n_cells + n_out : n_cells;
    const int offset = opts.one_step ? n_cells : 0;

    TabularMDP mdp(n_states, n_actions, env.discount());
    mdp.set_next_offset(offset);

    // Terminal classification by cell center.
    for (int c = 0; c < n_cells; ++c) mdp.set_terminal(c, env.terminal_state(grid.center(c)));
    if (opts.one_step)
        for (int c = 0; c < n_out; ++c) mdp.set_terminal(offset + c, true);

    const Grid& bin_grid = opts.one_step ? out_grid : grid;
    std::vector<std::int32_t> counts(static_cast<std::size_t>(n_out), 0);
    for (int c = 0; c < n_cells; ++c) {
        if (mdp.is_terminal(c)) continue;
        const StateVec center = grid.center(c);
        // One stream per cell, replayed for every action: common random
        // numbers across actions sharpen the action-gap estimates.
        const RngStream cell_stream = rng.split(static_cast<std::uint64_t>(c));
        for (int a = 0; a < n_actions; ++a) {
            RngStream cell_rng = cell_stream;
            std::fill(counts.begin(), counts.end(), 0);
            double reward_acc = 0.0;
            for (int m = 0; m < n_mc; ++m) {
                const auto res = env.step(center, a, cell_rng);
                ++counts[static_cast<std::size_t>(bin_grid.index(res.next))];
                reward_acc += res.reward;
            }
            SparseRow row;
            for (int t = 0; t < n_out; ++t) {
                if (counts[static_cast<std::size_t>(t)] == 0) continue;
                row.idx.push_back(offset + t);
                row.prob.push_back(static_cast<double>(counts[static_cast<std::size_t>(t)]) /
                                   static_cast<double>(n_mc));
            }
            mdp.set_row(c, a, std::move(row));
            if (opts.use_env_reward)
                mdp.set_action_reward(c, a, reward_acc / static_cast<double>(n_mc));
        }
    }

    if (opts.next_state_reward) {
        std::vector<double> r_next(static_cast<std::size_t>(n_states), 0.0);
        for (int c = 0; c < n_out; ++c)
            r_next[static_cast<std::size_t>(offset + c)] =
                opts.next_state_reward(bin_grid.center(c));
        if (!opts.one_step)
            for (int c = 0; c < n_cells; ++c)
                r_next[static_cast<std::size_t>(c)] = opts.next_state_reward(grid.center(c));
        mdp.set_next_state_reward(std::move(r_next));
    }
    mdp.refresh_rewards();
    return mdp;
}

TabularMDP laggedize(const TabularMDP& mdp, const Grid& grid) {
    // For one-step MDPs `grid` is the outcome grid of the absorbing block.
    const int offset = mdp.next_offset();
    const int expected_states = offset + grid.size();
    if (mdp.n_states() != expected_states) {
        std::ostringstream os;
        os << "laggedize: state space (" << mdp.n_states()
           << " states, offset " << offset << ") is not the product grid of size "
           << grid.size();
        throw std::invalid_argument(os.str());
    }
    const int dims = grid.dims();

    TabularMDP out = mdp;
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        for (int a = 0; a < mdp.n_actions(); ++a) {
            const auto entries = expand_row(mdp.row(s, a));
            // Per-dimension marginals of the row.
            std::vector<std::vector<double>> marg(static_cast<std::size_t>(dims));
            for (int d = 0; d < dims; ++d)
                marg[static_cast<std::size_t>(d)].assign(
                    static_cast<std::size_t>(grid.dim_cells(d)), 0.0);
            for (const auto& [idx, p] : entries) {
                const auto coords = grid.coords(idx - offset);
                for (int d = 0; d < dims; ++d)
                    marg[static_cast<std::size_t>(d)][static_cast<std::size_t>(
                        coords[static_cast<std::size_t>(d)])] += p;
            }
            FactoredRow row;
            row.base = static_cast<std::int32_t>(offset);
            row.scaled_idx.resize(static_cast<std::size_t>(dims));
            row.prob.resize(static_cast<std::size_t>(dims));
            for (int d = 0; d < dims; ++d) {
                const std::size_t ud = static_cast<std::size_t>(d);
                for (int c = 0; c < grid.dim_cells(d); ++c) {
                    const double p = marg[ud][static_cast<std::size_t>(c)];
                    if (p == 0.0) continue;
                    row.scaled_idx[ud].push_back(static_cast<std::int32_t>(c * grid.stride(d)));
                    row.prob[ud].push_back(p);
                }
            }
            out.set_row(s, a, std::move(row));
        }
    }
    out.refresh_rewards();
    return out;
}

namespace {

template <typename Fn>
std::pair<double, double> mean_and_sample_std(int n, Fn per_episode) {
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = per_episode(i);
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1)) : 0.0;
    return {mean, std::sqrt(var)};
}

}  // namespace

std::pair<double, double> policy_return(const envs::Env& env, const TabularPolicy& policy,
                                        const Grid& grid, int n_episodes, double gamma,
                                        RngStream& rng) {
    if (n_episodes < 1) throw std::invalid_argument("policy_return: n_episodes must be >= 1");
    return mean_and_sample_std(n_episodes, [&](int ep) {
        RngStream ep_rng = rng.split(static_cast<std::uint64_t>(ep));
        StateVec s = env.initial_state(ep_rng);
        double ret = 0.0, disc = 1.0;
        for (int t = 0; t < env.max_steps(); ++t) {
            const int a = policy[static_cast<std::size_t>(grid.index(s))];
            const auto res = env.step(s, a, ep_rng);
            ret += disc * res.reward;
            disc *= gamma;
            if (res.terminal) break;
            s = res.next;
        }
        return ret;
    });
}

std::pair<double, double> policy_return(const TabularMDP& mdp, const TabularPolicy& policy,
                                        const std::vector<int>& start_states, int n_episodes,
                                        RngStream& rng, int max_steps) {
    if (start_states.empty()) throw std::invalid_argument("policy_return: no start states");
    return mean_and_sample_std(n_episodes, [&](int ep) {
        RngStream ep_rng = rng.split(static_cast<std::uint64_t>(ep));
        int s = start_states[ep_rng.uniform_int(static_cast<std::uint32_t>(start_states.size()))];
        double ret = 0.0, disc = 1.0;
        for (int t = 0; t < max_steps && !mdp.is_terminal(s); ++t) {
            const int a = policy[static_cast<std::size_t>(s)];
            ret += disc * mdp.reward(s, a);
            disc *= mdp.gamma();
            s = sample_row(mdp.row(s, a), ep_rng);
        }
        return ret;
    });
}

EpisodeMetrics evaluate_policy_metrics(const envs::Env& env, const TabularPolicy& policy,
                                       const Grid& grid, int n_episodes, double gamma,
                                       RngStream& rng) {
    std::vector<double> rets, dists, lens;
    for (int ep = 0; ep < n_episodes; ++ep) {
        RngStream ep_rng = rng.split(static_cast<std::uint64_t>(ep));
        StateVec s = env.initial_state(ep_rng);
        double ret = 0.0, disc = 1.0;
        int len = 0;
        for (int t = 0; t < env.max_steps(); ++t) {
            const int a = policy[static_cast<std::size_t>(grid.index(s))];
            const auto res = env.step(s, a, ep_rng);
            ret += disc * res.reward;
            disc *= gamma;
            ++len;
            s = res.next;
            if (res.terminal) break;
        }
        double d2 = 0.0;
        for (double x : s) d2 += x * x;
        rets.push_back(ret);
        dists.push_back(std::sqrt(d2));
        lens.push_back(static_cast<double>(len));
    }
    const auto stats = [](const std::vector<double>& v) {
        double sum = 0.0, sumsq = 0.0;
        for (double x : v) {
            sum += x;
            sumsq += x * x;
        }
        const double mean = sum / static_cast<double>(v.size());
        const double var =
            v.size() > 1
                ? std::max(0.0, (sumsq - static_cast<double>(v.size()) * mean * mean) /
                                    (static_cast<double>(v.size()) - 1.0))
                : 0.0;
        return std::pair<double, double>{mean, std::sqrt(var)};
    };
    EpisodeMetrics m;
    std::tie(m.return_mean, m.return_std) = stats(rets);
    std::tie(m.distance_mean, m.distance_std) = stats(dists);
    std::tie(m.length_mean, m.length_std) = stats(lens);
    return m;
}

std::vector<Witness> consistency_check(const TabularMDP& mdp_true, const TabularMDP& mdp_lagged,
                                       const std::vector<int>& start_states, double margin) {
    if (mdp_true.n_states() != mdp_lagged.n_states() ||
        mdp_true.n_actions() != mdp_lagged.n_actions())
        throw std::invalid_argument("consistency_check: MDP shapes differ");
    const auto vi_true = value_iteration(mdp_true);
    const auto vi_lag = value_iteration(mdp_lagged);

    // Support reachability from the start states under the true optimal policy.
    std::vector<char> reachable(static_cast<std::size_t>(mdp_true.n_states()), 0);
    std::deque<int> frontier;
    for (int s : start_states) {
        if (!reachable[static_cast<std::size_t>(s)]) {
            reachable[static_cast<std::size_t>(s)] = 1;
            frontier.push_back(s);
        }
    }
    while (!frontier.empty()) {
        const int s = frontier.front();
        frontier.pop_front();
        if (mdp_true.is_terminal(s)) continue;
        const int a = vi_true.policy[static_cast<std::size_t>(s)];
        for (const auto& [next, p] : expand_row(mdp_true.row(s, a))) {
            if (p > 0.0 && !reachable[static_cast<std::size_t>(next)]) {
                reachable[static_cast<std::size_t>(next)] = 1;
                frontier.push_back(next);
            }
        }
    }

    std::vector<Witness> witnesses;
    for (int s = 0; s < mdp_true.n_states(); ++s) {
        if (!reachable[static_cast<std::size_t>(s)] || mdp_true.is_terminal(s)) continue;
        const int a0 = vi_true.policy[static_cast<std::size_t>(s)];
        const int a1 = vi_lag.policy[static_cast<std::size_t>(s)];
        if (a0 == a1) continue;
        const bool true_prefers = vi_true.q.at(s, a0) > vi_true.q.at(s, a1) + margin;
        const bool lag_prefers = vi_lag.q.at(s, a1) > vi_lag.q.at(s, a0) + margin;
        if (true_prefers && lag_prefers) witnesses.push_back(Witness{s, a0, a1});
    }
    return witnesses;
}

RegionBounds driving_region(const envs::DrivingParams& params) {
    params.validate();
    const double dv0 = params.dv[0], dv1 = params.dv[1];
    const double g0 = params.g(0), g1 = params.g(1);
    if (g1 < g0) throw std::invalid_argument("driving_region: need g(A1) >= g(A0)");
    RegionBounds b;
    b.upper = -(dv1 + dv0);
    b.lower = b.upper - params.sigma_v * params.sigma_v * (g1 * g1 - g0 * g0) / (dv1 - dv0);
    return b;
}

Grid driving_outcome_grid(const envs::DrivingParams& params, const Grid& decision_grid) {
    if (decision_grid.dims() != 2)
        throw std::invalid_argument("driving_outcome_grid: expected a (p, v) grid");
    const double v_reach = params.dv[1] + 3.0 * params.g(1) * params.sigma_v;
    const double margin_v = v_reach;
    const double margin_p =
        params.dt * (std::max(std::abs(decision_grid.dim(1).lo), decision_grid.dim(1).hi) +
                     v_reach) +
        3.0 * params.sigma_p;
    std::vector<GridDim> dims;
    for (int d = 0; d < 2; ++d) {
        const double margin = d == 0 ? margin_p : margin_v;
        const double width = decision_grid.cell_width(d);
        const int extra = static_cast<int>(std::ceil(margin / width));
        dims.push_back(GridDim{decision_grid.dim(d).lo - extra * width,
                               decision_grid.dim(d).hi + extra * width,
                               decision_grid.dim(d).n_cells + 2 * extra});
    }
    return Grid(dims);
}

PolicyMap policy_map(const TabularPolicy& policy, const Grid& grid) {
    if (grid.dims() != 2) throw std::invalid_argument("policy_map: grid must be 2-D");
    PolicyMap map;
    map.n0 = grid.dim_cells(0);
    map.n1 = grid.dim_cells(1);
    map.actions.resize(static_cast<std::size_t>(grid.size()));
    for (int c0 = 0; c0 < map.n0; ++c0)
        for (int c1 = 0; c1 < map.n1; ++c1) {
            const int idx = grid.from_coords({c0, c1});
            map.actions[static_cast<std::size_t>(c0) * static_cast<std::size_t>(map.n1) +
                        static_cast<std::size_t>(c1)] = policy[static_cast<std::size_t>(idx)];
        }
    return map;
}

std::string policy_map_csv(const PolicyMap& map) {
    std::ostringstream os;
    for (int c0 = 0; c0 < map.n0; ++c0) {
        for (int c1 = 0; c1 < map.n1; ++c1)
            os << map.at(c0, c1) << (c1 + 1 == map.n1 ? '\n' : ',');
    }
    return os.str();
}

}  // namespace inslab::planning
