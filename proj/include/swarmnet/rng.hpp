#pragma once

#include <cstdint>

namespace swarmnet {

// splitmix64 step; also used to hash seeds and stream ids together.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ generator. Hand-rolled so that every draw is bit-identical
// across platforms and standard libraries; std:: distributions are
// implementation-defined and never used.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint32_t uniform_below(std::uint32_t bound) {
        // Lemire's multiply-shift with rejection to kill modulo bias.
        std::uint64_t x = next_u64() & 0xffffffffULL;
        std::uint64_t m = x * bound;
        auto lo = static_cast<std::uint32_t>(m);
        if (lo < bound) {
            const std::uint32_t threshold = (0u - bound) % bound;
            while (lo < threshold) {
                x = next_u64() & 0xffffffffULL;
                m = x * bound;
                lo = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }
    std::uint64_t s_[4] = {};
};

// Named per-trial substreams. Draw order inside one substream never affects
// another, so e.g. adding link resamples cannot perturb spawn positions.
enum class Substream : std::uint64_t {
    spawn = 1,
    link_sampling = 2,
    delivery_draws = 3,
    mac_join = 4,
};

inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial_index,
                                 Substream stream) {
    std::uint64_t s = master_seed;
    std::uint64_t h = splitmix64_next(s);
    s = h ^ (trial_index * 0x9e3779b97f4a7c15ULL);
    h = splitmix64_next(s);
    s = h ^ static_cast<std::uint64_t>(stream);
    return splitmix64_next(s);
}

inline RngStream make_stream(std::uint64_t master_seed, std::uint64_t trial_index,
                             Substream stream) {
    return RngStream(derive_seed(master_seed, trial_index, stream));
}

}  // namespace swarmnet
