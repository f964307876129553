#pragma once

// Counter-based random numbers: Philox-4x32-10 keyed by (seed, stream), with
// the counter laid out as (path, step, block, lane).  Any path/step's draws
// are reproducible in isolation, so batching and thread count cannot change
// results.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cmcds {

struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> round(std::array<std::uint32_t, 4> ctr,
                                              std::uint32_t k0, std::uint32_t k1) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
    }

    /// Ten rounds with Weyl key schedule.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::uint32_t k0, std::uint32_t k1) {
        ctr = round(ctr, k0, k1);
        for (int r = 1; r < 10; ++r) {
            k0 += kWeyl0;
            k1 += kWeyl1;
            ctr = round(ctr, k0, k1);
        }
        return ctr;
    }
};

/// Uniform in (0,1); offset keeps 0 and 1 unattainable.
inline double uniformFromBits(std::uint32_t x) {
    return (static_cast<double>(x) + 0.5) * 0x1p-32;
}

/// Standard normal draws for one (seed, stream, path) triple.  Each step has
/// its own counter plane; draws inside a step advance a block counter, so a
/// step may consume any number of variates (e.g. on resampling).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t path)
        : k0_(static_cast<std::uint32_t>(seed)),
          k1_(static_cast<std::uint32_t>(seed >> 32) ^ stream), path_(path) {}

    void startStep(std::uint32_t step) {
        step_ = step;
        block_ = 0;
        have_ = 0;
    }

    double next() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

private:
    void refill() {
        const auto words = Philox4x32::block({path_, step_, block_++, 0}, k0_, k1_);
        // Box-Muller on two uniform pairs
        for (int p = 0; p < 2; ++p) {
            const double u1 = uniformFromBits(words[2 * p]);
            const double u2 = uniformFromBits(words[2 * p + 1]);
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double a = 2.0 * std::numbers::pi * u2;
            buf_[2 * p] = r * std::cos(a);
            buf_[2 * p + 1] = r * std::sin(a);
        }
        have_ = 4;
    }

    std::uint32_t k0_, k1_, path_;
    std::uint32_t step_ = 0, block_ = 0;
    double buf_[4] = {};
    int have_ = 0;
};

} // namespace cmcds
