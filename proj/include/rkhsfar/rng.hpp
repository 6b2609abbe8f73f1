#pragma once

#include <cstdint>
#include <random>

namespace rkhsfar {

/// The library's single random source: a 64-bit Mersenne Twister (std::mt19937_64,
/// whose output stream is fixed by the standard) with hand-rolled transforms.
///
/// uniform01() = (word >> 11) * 2^-53. normal() uses the Box-Muller transform on two
/// consecutive uniforms and returns the cosine branch first, then the cached sine branch.
/// Any port that reproduces these three rules reproduces the streams exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// In [0, 1).
    double uniform01();
    /// In [lo, hi).
    double uniform(double lo, double hi);
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finaliser; used to derive independent seeds from (base, stream, index).
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace rkhsfar
