#pragma once

#include <cstdint>

namespace gridcpd {

// Self-contained seedable generator so simulation and calibration results
// are reproducible bit-for-bit across platforms.
//
// Core: xoshiro256++ (Blackman & Vigna, 2019). State is seeded by running
// splitmix64 (Steele, Lea & Flood, 2014) from the 64-bit seed, which also
// decorrelates consecutive seeds; replication r of a run with master seed m
// uses Rng(m + r).
//
// Doubles are the top 53 bits mapped to [0, 1). Gaussians use Marsaglia's
// polar method. Poisson uses inversion by sequential search for mean < 30
// and the PTRS transformed-rejection sampler (Hoermann, 1993) above.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    double uniform();                 // [0, 1)
    double gaussian();                // N(0, 1)
    std::int64_t poisson(double mean);

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gridcpd
