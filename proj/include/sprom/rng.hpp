#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "sprom/common.hpp"

namespace sprom {

/// Counter-based generator (Philox 4x32-10). A (seed, stream) pair fully
/// determines the sequence, so per-realization streams can be drawn in
/// parallel without coordination and results do not depend on scheduling.
class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0, 0, static_cast<std::uint32_t>(stream),
               static_cast<std::uint32_t>(stream >> 32)} {
        refill();
    }

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            bump_counter();
            refill();
        }
        return block_[idx_++];
    }

    /// Uniform in (0, 1).
    double next_double() {
        return (static_cast<double>(next_u32()) + 0.5) * 0x1p-32;
    }

    /// Standard normal via Box-Muller (explicit, platform-independent).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * kPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Standard complex normal, E|z|^2 = 1.
    Complex next_cgaussian() {
        double re = next_gaussian();
        double im = next_gaussian();
        return Complex(re, im) * 0.7071067811865476;
    }

    /// Raw keyed block, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(
        std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    static std::array<std::uint32_t, 4> single_round(
        const std::array<std::uint32_t, 4>& x,
        const std::array<std::uint32_t, 2>& key) {
        std::uint64_t p0 = std::uint64_t{0xD2511F53u} * x[0];
        std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * x[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ key[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ key[1],
                static_cast<std::uint32_t>(p0)};
    }

    void bump_counter() {
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    void refill() {
        block_ = block(ctr_, key_);
        idx_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace sprom
