#pragma once

// Counter-based random streams. A stream is (key, counter); draws are a
// SplitMix64-style permutation of key+counter, so copies of a stream replay
// the identical sequence and child streams derived by split() are stable
// under any evaluation order. Normal variates use Box-Muller on the stream's
// own uniforms, keeping sequences identical across platforms and compilers.

#include <cstdint>
#include <string_view>

namespace inslab {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : key_(mix_(seed ^ kKeyTag)) {}

    // Deterministic child stream; distinct labels give distinct keys.
    // Sub-seeding: child key = mix(parent key ^ fnv1a64(label)).
    [[nodiscard]] RngStream split(std::string_view label) const;

    // Numeric variant for per-index fan-out (episodes, cells, rollouts).
    [[nodiscard]] RngStream split(std::uint64_t index) const;

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ull;
        return mix_(z);
    }

    // Uniform on (0,1); never returns 0 or 1.
    double uniform() {
        const std::uint64_t u = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
    }

    // Standard normal (Box-Muller; the paired variate is cached).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n).
    std::uint32_t uniform_int(std::uint32_t n);

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t key() const { return key_; }

private:
    RngStream(std::uint64_t key, int) : key_(key) {}

    static constexpr std::uint64_t kKeyTag = 0xA02B'DBF7'BB3C'0A7Full;

    static std::uint64_t mix_(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Spec-facing spelling of RngStream::split.
RngStream split_rng(const RngStream& parent, std::string_view label);

}  // namespace inslab
