#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace evolvebm {

// Philox4x32-10 counter-based generator (Salmon et al., Random123 family).
// A draw is a pure function of (seed, stream, counter), so trajectories are
// reproducible and independent of scheduling or worker count.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream,
                                              std::uint64_t counter) {
        std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        std::uint32_t c0 = static_cast<std::uint32_t>(counter);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {c0, c1, c2, c3};
    }
};

// Stream of standard normal deviates indexed by draw number. One Philox block
// yields two uniforms which Box-Muller turns into two normals; sequential
// access reuses the cached block.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    // q-th standard normal of this stream; any access order gives the same values.
    double normal(std::uint64_t q) {
        const std::uint64_t blk = q / 2;
        if (!have_ || blk != block_index_) {
            fill(blk);
        }
        return pair_[q % 2];
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    void fill(std::uint64_t blk) {
        const auto w = Philox4x32::block(seed_, stream_, blk);
        const std::uint64_t a =
            (static_cast<std::uint64_t>(w[0]) << 32) | static_cast<std::uint64_t>(w[1]);
        const std::uint64_t b =
            (static_cast<std::uint64_t>(w[2]) << 32) | static_cast<std::uint64_t>(w[3]);
        // u1 in (0,1] so log stays finite; u2 in [0,1).
        const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        pair_[0] = r * std::cos(theta);
        pair_[1] = r * std::sin(theta);
        block_index_ = blk;
        have_ = true;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    bool have_ = false;
    double pair_[2] = {0.0, 0.0};
};

}  // namespace evolvebm
