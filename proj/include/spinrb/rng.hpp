#pragma once

#include <cmath>
#include <cstdint>

namespace spinrb {

// Counter-style generator built on the SplitMix64 finalizer.  Every
// (sequence, shot) gets its own stream derived by hashing the experiment
// seed together with a role tag and the (n, k, shot) coordinates, so
// results do not depend on execution order or thread count.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).  The modulo bias is ~n/2^64, far below
    // anything the uniformity tests can resolve.
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    bool bernoulli(double p) { return uniform() < p; }

    // One Box-Muller pair of independent standard normals.
    void normal_pair(double& z0, double& z1) {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * uniform();
        z0 = r * std::cos(t);
        z1 = r * std::sin(t);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

namespace stream {
inline constexpr std::uint64_t kSequence = 0x5345515345515345ull;
inline constexpr std::uint64_t kShotNoise = 0x4e4f49534e4f4953ull;
inline constexpr std::uint64_t kShotMeas = 0x4d4541534d454153ull;
inline constexpr std::uint64_t kBootstrap = 0x424f4f54424f4f54ull;
}  // namespace stream

// Stream id = iterated SplitMix64 hash over (seed, tag, a, b, c).
inline SplitRng make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0,
                            std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = SplitRng::mix(seed ^ tag);
    s = SplitRng::mix(s ^ a);
    s = SplitRng::mix(s ^ b);
    s = SplitRng::mix(s ^ c);
    return SplitRng(s);
}

}  // namespace spinrb
