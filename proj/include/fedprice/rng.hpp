#pragma once

#include <cmath>
#include <cstdint>

namespace fedprice {

// Deterministic, substreamable RNG. xoshiro256** seeded through splitmix64,
// with a Box-Muller normal so every sample is bit-stable across platforms.
// Substreams derive from (seed, stream, substream) so per-client/per-round
// draws are identical whether produced serially or in parallel.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0,
                 std::uint64_t substream = 0) {
        std::uint64_t s = seed;
        std::uint64_t mixed = splitmix64(s) ^ (0x632be59bd9b4e019ULL * (stream + 1));
        mixed ^= 0x9e6c63d0876a9a35ULL * (substream + 1);
        std::uint64_t s2 = mixed;
        for (int i = 0; i < 4; ++i) state_[i] = splitmix64(s2);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in (0,1); never returns 0 or 1
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

    // standard normal via Box-Muller (deterministic, platform-stable)
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double gaussian(double mean, double stddev) {
        return mean + stddev * next_gaussian();
    }

    // integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;  // bias negligible for n << 2^64
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
    bool have_spare_;
    double spare_;
};

}  // namespace fedprice
