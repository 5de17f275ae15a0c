#include "inslab/envs/wrappers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace inslab::envs {

namespace {

void check_pairs(const std::vector<std::pair<int, int>>& pairs, int dim, const char* who) {
    std::vector<int> used;
    for (auto [i, j] : pairs) {
        if (i == j || i < 0 || j < 0 || i >= dim || j >= dim)
            throw std::invalid_argument(std::string(who) + ": invalid dimension pair");
        used.push_back(i);
        used.push_back(j);
    }
    std::sort(used.begin(), used.end());
    if (std::adjacent_find(used.begin(), used.end()) != used.end())
        throw std::invalid_argument(std::string(who) + ": pairs must be disjoint");
}

}  // namespace

void NoiseInjectConfig::validate(int dim) const {
    if (r_noise < 0.0) throw std::invalid_argument("NoiseInjectConfig: r_noise < 0");
    if (std::abs(pair_corr) >= 1.0)
        throw std::invalid_argument("NoiseInjectConfig: |pair_corr| must be < 1");
    check_pairs(pairs, dim, "NoiseInjectConfig");
}

void RewardAugmentConfig::validate(int dim) const {
    check_pairs(pairs, dim, "RewardAugmentConfig");
    if (!norm_bounds.empty() && norm_bounds.size() != pairs.size())
        throw std::invalid_argument("RewardAugmentConfig: norm_bounds size != pairs size");
    for (auto [lo, hi] : norm_bounds)
        if (!(hi > lo)) throw std::invalid_argument("RewardAugmentConfig: need hi > lo");
}

StateVec wrap_noise_inject(const StateVec& base_next, const StateVec& prev,
                           const NoiseInjectConfig& cfg, RngStream& rng) {
    if (base_next.size() != prev.size())
        throw std::invalid_argument("wrap_noise_inject: dimension mismatch");
    const int n = static_cast<int>(base_next.size());
    if (cfg.r_noise == 0.0) return base_next;

    std::vector<double> sigma(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        sigma[ui] = std::sqrt(cfg.r_noise * std::abs(base_next[ui] - prev[ui]));
    }
    std::vector<double> z(static_cast<std::size_t>(n));
    for (auto& zi : z) zi = rng.normal();

    StateVec out = base_next;
    std::vector<bool> paired(static_cast<std::size_t>(n), false);
    const double rho = cfg.pair_corr;
    const double tail = std::sqrt(1.0 - rho * rho);
    for (auto [i, j] : cfg.pairs) {
        const std::size_t ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
        out[ui] += sigma[ui] * z[ui];
        out[uj] += sigma[uj] * (rho * z[ui] + tail * z[uj]);
        paired[ui] = paired[uj] = true;
    }
    for (int i = 0; i < n; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        if (!paired[ui]) out[ui] += sigma[ui] * z[ui];
    }
    return out;
}

double wrap_reward_augment(double base_r, const StateVec& s_next,
                           const RewardAugmentConfig& cfg) {
    if (cfg.pairs.empty() || cfg.r_reward == 0.0) return base_r;
    if (cfg.norm_bounds.size() != cfg.pairs.size())
        throw std::invalid_argument("wrap_reward_augment: norm bounds not calibrated");
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.pairs.size(); ++k) {
        const auto [i, j] = cfg.pairs[k];
        const auto [lo, hi] = cfg.norm_bounds[k];
        const double sij = s_next[static_cast<std::size_t>(i)] + s_next[static_cast<std::size_t>(j)];
        acc += std::clamp((sij * sij - lo) / (hi - lo), 0.0, 1.0);
    }
    return base_r + cfg.r_reward * acc / static_cast<double>(cfg.pairs.size());
}

std::vector<std::pair<double, double>> calibrate_norm_bounds(
    const Env& env, const std::vector<std::pair<int, int>>& pairs, int steps, RngStream rng) {
    std::vector<std::vector<double>> samples(pairs.size());
    StateVec s = env.initial_state(rng);
    for (int t = 0; t < steps; ++t) {
        const ActionId a = static_cast<ActionId>(rng.uniform_int(
            static_cast<std::uint32_t>(env.n_actions())));
        auto res = env.step(s, a, rng);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double sij = res.next[static_cast<std::size_t>(pairs[k].first)] +
                               res.next[static_cast<std::size_t>(pairs[k].second)];
            samples[k].push_back(sij * sij);
        }
        s = res.terminal ? env.initial_state(rng) : res.next;
    }
    std::vector<std::pair<double, double>> bounds;
    for (auto& v : samples) {
        std::sort(v.begin(), v.end());
        const auto q = [&](double frac) {
            const std::size_t idx = static_cast<std::size_t>(frac * (static_cast<double>(v.size()) - 1.0));
            return v[idx];
        };
        double lo = q(0.01), hi = q(0.99);
        if (!(hi > lo)) hi = lo + 1e-9;
        bounds.emplace_back(lo, hi);
    }
    return bounds;
}

WrappedEnv::WrappedEnv(EnvPtr base, NoiseInjectConfig noise, RewardAugmentConfig augment,
                       std::uint64_t calibration_seed)
    : base_(std::move(base)), noise_(std::move(noise)), augment_(std::move(augment)) {
    noise_.validate(base_->state_dim());
    augment_.validate(base_->state_dim());
    if (!augment_.pairs.empty() && augment_.norm_bounds.empty()) {
        // Calibrate on the noise-injected dynamics so the bounds reflect what
        // the agent will actually observe.
        struct NoisyOnly final : Env {
            const Env* base;
            const NoiseInjectConfig* cfg;
            int state_dim() const override { return base->state_dim(); }
            int n_actions() const override { return base->n_actions(); }
            StateVec initial_state(RngStream& rng) const override {
                return base->initial_state(rng);
            }
            StepResult step(const StateVec& s, ActionId a, RngStream& rng) const override {
                auto res = base->step(s, a, rng);
                if (!res.overflow) {
                    res.next = wrap_noise_inject(res.next, s, *cfg, rng);
                    res.terminal = base->terminal_state(res.next) || res.overflow;
                }
                return res;
            }
            bool terminal_state(const StateVec& s) const override {
                return base->terminal_state(s);
            }
            double reward(const StateVec& s, ActionId a, const StateVec& next) const override {
                return base->reward(s, a, next);
            }
            int max_steps() const override { return base->max_steps(); }
            double discount() const override { return base->discount(); }
        } noisy;
        noisy.base = base_.get();
        noisy.cfg = &noise_;
        augment_.norm_bounds = calibrate_norm_bounds(
            noisy, augment_.pairs, 10000, RngStream(calibration_seed).split("norm-calibration"));
    }
}

StepResult WrappedEnv::step(const StateVec& s, ActionId a, RngStream& rng) const {
    StepResult res = base_->step(s, a, rng);
    if (res.overflow) return res;
    res.next = wrap_noise_inject(res.next, s, noise_, rng);
    for (double x : res.next) {
        if (!std::isfinite(x)) {
            res.overflow = true;
            res.terminal = true;
            return res;
        }
    }
    res.terminal = base_->terminal_state(res.next);
    res.reward = reward(s, a, res.next);
    return res;
}

double WrappedEnv::reward(const StateVec& s, ActionId a, const StateVec& next) const {
    return wrap_reward_augment(base_->reward(s, a, next), next, augment_);
}

}  // namespace inslab::envs
