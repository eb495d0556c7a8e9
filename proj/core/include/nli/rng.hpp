#pragma once

#include <cstdint>
#include <cstddef>
#include <string>

namespace nli {

// splitmix64-seeded xoshiro256++. Cross-platform deterministic, splittable into
// independent substreams by (seed, stream) pairs. The algorithm name is recorded
// in run outputs so results can be reproduced bit-exactly.
class Rng {
public:
    static constexpr const char* kAlgorithm = "xoshiro256++/splitmix64";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    // uniform in [0, 1) with 53-bit resolution
    double uniform();

    // uniform integer in [0, n)
    std::uint64_t uniform_below(std::uint64_t n);

    // standard complex-normal pair via Box-Muller (returns through out params)
    void normal_pair(double& a, double& b);

    // derive an independent substream deterministically
    Rng split(std::uint64_t stream) const;

private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace nli
