#include "inslab/envs/cartpole_lite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inslab::envs {

RewardFamily RewardFamily::make(RewardFamilyTag tag) {
    RewardFamily f;
    f.tag = tag;
    switch (tag) {
        case RewardFamilyTag::Original: break;
        case RewardFamilyTag::A: f.i = 2; break;
        case RewardFamilyTag::B: f.i = 0; f.j = 2; break;
        case RewardFamilyTag::C: f.i = 1; f.j = 3; break;
        case RewardFamilyTag::D: f.i = 1; f.j = 3; f.k = 0; f.m = 2; break;
        case RewardFamilyTag::E: f.i = 1; f.j = 3; f.corr_override = 0.9; break;
    }
    return f;
}

std::vector<std::pair<int, int>> RewardFamily::dependent_pairs() const {
    switch (tag) {
        case RewardFamilyTag::D: return {{i, j}, {k, m}};
        case RewardFamilyTag::Original:
        case RewardFamilyTag::A:
        case RewardFamilyTag::B:
            // Keep the environment's instantaneous dependence on (xdot,
            // thetadot); B's reward pair (x, theta) stays independent.
            return {{1, 3}};
        case RewardFamilyTag::C:
        case RewardFamilyTag::E: return {{i, j}};
    }
    return {};
}

std::vector<std::pair<int, int>> RewardFamily::reward_pairs() const {
    switch (tag) {
        case RewardFamilyTag::Original:
        case RewardFamilyTag::A: return {};
        case RewardFamilyTag::B:
        case RewardFamilyTag::C:
        case RewardFamilyTag::E: return {{i, j}};
        case RewardFamilyTag::D: return {{i, j}, {k, m}};
    }
    return {};
}

double RewardFamily::correlation(double default_corr) const {
    return corr_override.value_or(default_corr);
}

std::string RewardFamily::name() const {
    switch (tag) {
        case RewardFamilyTag::Original: return "original";
        case RewardFamilyTag::A: return "A";
        case RewardFamilyTag::B: return "B";
        case RewardFamilyTag::C: return "C";
        case RewardFamilyTag::D: return "D";
        case RewardFamilyTag::E: return "E";
    }
    return "?";
}

RewardFamilyTag reward_family_from_name(const std::string& name) {
    if (name == "original" || name == "Original") return RewardFamilyTag::Original;
    if (name == "A") return RewardFamilyTag::A;
    if (name == "B") return RewardFamilyTag::B;
    if (name == "C") return RewardFamilyTag::C;
    if (name == "D") return RewardFamilyTag::D;
    if (name == "E") return RewardFamilyTag::E;
    throw std::invalid_argument("unknown reward family: " + name);
}

CartPoleLiteEnv::CartPoleLiteEnv(RewardFamily family, NoiseInjectConfig noise,
                                 CartPoleLiteParams params, std::uint64_t calibration_seed)
    : family_(family), noise_(std::move(noise)), params_(params) {
    noise_.pairs = family_.dependent_pairs();
    noise_.pair_corr = family_.correlation(noise_.pair_corr);
    noise_.validate(4);

    // Calibrate Norm bounds for every extra-reward term (pairs, or the single
    // dimension for family A) from a random-policy rollout; frozen afterward.
    std::vector<std::pair<int, int>> terms = family_.reward_pairs();
    const bool single_dim = family_.tag == RewardFamilyTag::A;
    if (single_dim) terms.push_back({family_.i, family_.i});
    if (!terms.empty()) {
        RngStream rng = RngStream(calibration_seed).split("cartpole-norm-calibration");
        std::vector<std::vector<double>> samples(terms.size());
        StateVec s = initial_state(rng);
        for (int t = 0; t < 10000; ++t) {
            const ActionId a = static_cast<ActionId>(rng.uniform_int(2));
            StateVec next = deterministic_next(s, a);
            next = wrap_noise_inject(next, s, noise_, rng);
            for (std::size_t q = 0; q < terms.size(); ++q) {
                const auto [ti, tj] = terms[q];
                const double base = single_dim ? next[static_cast<std::size_t>(ti)]
                                               : next[static_cast<std::size_t>(ti)] +
                                                     next[static_cast<std::size_t>(tj)];
                samples[q].push_back(base * base);
            }
            s = terminal_state(next) ? initial_state(rng) : next;
        }
        for (auto& v : samples) {
            std::sort(v.begin(), v.end());
            const auto at = [&](double frac) {
                return v[static_cast<std::size_t>(frac * (static_cast<double>(v.size()) - 1.0))];
            };
            double lo = at(0.01), hi = at(0.99);
            if (!(hi > lo)) hi = lo + 1e-9;
            term_bounds_.emplace_back(lo, hi);
        }
    }
}

StateVec CartPoleLiteEnv::initial_state(RngStream& rng) const {
    StateVec s(4);
    for (auto& x : s) x = rng.uniform(-0.05, 0.05);
    return s;
}

StateVec CartPoleLiteEnv::deterministic_next(const StateVec& s, ActionId a) const {
    const double x = s[0], xdot = s[1], theta = s[2], thetadot = s[3];
    const double force = (a == 1) ? params_.force_mag : -params_.force_mag;
    const double total_mass = params_.mass_cart + params_.mass_pole;
    const double pml = params_.mass_pole * params_.half_length;
    const double costh = std::cos(theta);
    const double sinth = std::sin(theta);
    const double temp = (force + pml * thetadot * thetadot * sinth) / total_mass;
    const double theta_acc =
        (params_.gravity * sinth - costh * temp) /
        (params_.half_length * (4.0 / 3.0 - params_.mass_pole * costh * costh / total_mass));
    const double x_acc = temp - pml * theta_acc * costh / total_mass;
    return {x + params_.dt * xdot, xdot + params_.dt * x_acc, theta + params_.dt * thetadot,
            thetadot + params_.dt * theta_acc};
}

bool CartPoleLiteEnv::terminal_state(const StateVec& s) const {
    return std::abs(s[0]) > params_.x_bound || std::abs(s[2]) > params_.theta_bound;
}

double CartPoleLiteEnv::family_term(const StateVec& s) const {
    if (term_bounds_.empty()) return 0.0;
    const bool single_dim = family_.tag == RewardFamilyTag::A;
    const auto pairs = family_.reward_pairs();
    double acc = 0.0;
    for (std::size_t q = 0; q < term_bounds_.size(); ++q) {
        const auto [lo, hi] = term_bounds_[q];
        double base;
        if (single_dim) {
            base = s[static_cast<std::size_t>(family_.i)];
        } else {
            const auto [i, j] = pairs[q];
            base = s[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j)];
        }
        acc += -std::clamp((base * base - lo) / (hi - lo), 0.0, 1.0);
    }
    return acc / static_cast<double>(term_bounds_.size());
}

double CartPoleLiteEnv::reward(const StateVec&, ActionId, const StateVec& next) const {
    return 1.0 + family_term(next);
}

StepResult CartPoleLiteEnv::step(const StateVec& s, ActionId a, RngStream& rng) const {
    if (a < 0 || a > 1) throw std::invalid_argument("cartpole: action must be 0 or 1");
    if (s.size() != 4) throw std::invalid_argument("cartpole: state must have 4 dimensions");
    StepResult out;
    out.next = wrap_noise_inject(deterministic_next(s, a), s, noise_, rng);
    for (double v : out.next) {
        if (!std::isfinite(v) || std::abs(v) > 1e6) {
            out.overflow = true;
            out.terminal = true;
            out.reward = 0.0;
            return out;
        }
    }
    out.terminal = terminal_state(out.next);
    out.reward = reward(s, a, out.next);
    return out;
}

StepResult cartpole_lite_step(const CartPoleLiteEnv& env, const StateVec& s, ActionId a,
                              RngStream& rng) {
    return env.step(s, a, rng);
}

}  // namespace inslab::envs
