#include "inslab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace inslab {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace

RngStream RngStream::split(std::string_view label) const {
    if (label.empty()) throw std::invalid_argument("RngStream::split: empty label");
    return RngStream(mix_(key_ ^ fnv1a64(label)), 0);
}

RngStream RngStream::split(std::uint64_t index) const {
    return RngStream(mix_(key_ ^ mix_(index + 0x9E3779B97F4A7C15ull)), 0);
}

double RngStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::uint32_t RngStream::uniform_int(std::uint32_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::uniform_int: n == 0");
    // Rejection below 2^64 mod n keeps the draw unbiased.
    const std::uint64_t threshold = (-std::uint64_t{n}) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return static_cast<std::uint32_t>(r % n);
    }
}

RngStream split_rng(const RngStream& parent, std::string_view label) {
    return parent.split(label);
}

}  // namespace inslab
