#pragma once

#include <cstdint>

namespace clockforge {

// xoshiro256++ with splitmix64 seeding. Gaussians via the polar method.
// Self-contained so that traces are bit-reproducible for a given seed across
// standard libraries (std::normal_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Uniform in [0, 1) with 53 bits.
    double uniform01();

    // Standard normal (polar Box-Muller, one value cached).
    double gaussian();

    // Derive the RNG for an independent stream. Streams are decorrelated by
    // hashing (master, stream) through splitmix64; this is the documented
    // splitting function referenced by run manifests.
    static Rng stream(uint64_t master_seed, uint64_t stream_id);

    static constexpr const char* algorithm_id() { return "xoshiro256++/polar-box-muller"; }

private:
    uint64_t s_[4];
    double cached_ = 0;
    bool has_cached_ = false;
};

}  // namespace clockforge
