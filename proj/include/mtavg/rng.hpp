#pragma once

#include <cstdint>
#include <random>

namespace mtavg {

// splitmix64 step; used to derive independent stream seeds from (seed, ids).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-style RNG stream: Rng(seed, a, b, c) is an independent stream for
// every distinct id tuple, so replicate/trial loops stay bit-deterministic
// under any parallel schedule.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                 std::uint64_t c = 0)
        : engine_(stream_seed(seed, a, b, c)) {}

    double uniform() { return unit_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
    double normal() { return normal_(engine_); }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

    static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a,
                                     std::uint64_t b, std::uint64_t c) {
        std::uint64_t s = splitmix64(seed ^ 0x853c49e6748fea9bULL);
        s = splitmix64(s ^ a);
        s = splitmix64(s ^ b);
        s = splitmix64(s ^ c);
        return s;
    }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mtavg
