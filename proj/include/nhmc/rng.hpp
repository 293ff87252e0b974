#pragma once

#include <cstdint>

namespace nhmc::rng {

// 64-bit finalizer (splitmix64). Used both as the per-stream generator step
// and to derive independent stream seeds from (master_seed, index) pairs, so
// replications can run in any order on any number of threads.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

double normal_quantile(double u);  // defined in stats.cpp

class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform strictly inside (0,1); safe as a quantile-function argument.
    double next_open_uniform() {
        double u = next_uniform();
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double next_normal() { return normal_quantile(next_open_uniform()); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Modulo bias is < 2^-40 for the n used here (batch indices).
        return next_u64() % n;
    }

private:
    std::uint64_t state_;
};

// Stream for one replication of one experiment. `salt` separates purposes
// (pilot vs main run, per-horizon sub-experiments, ...).
inline Stream replication_stream(std::uint64_t master_seed, std::uint64_t replication,
                                 std::uint64_t salt = 0) {
    return Stream(hash64(hash64(master_seed, salt), replication));
}

}  // namespace nhmc::rng
