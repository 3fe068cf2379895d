#pragma once

#include <cstdint>
#include <array>
#include <initializer_list>
#include <vector>

namespace ddlab {

/// Seedable, platform-independent random stream (xoshiro256++ seeded via
/// SplitMix64). Pure 64-bit integer arithmetic, so a given seed produces the
/// same stream on every build and platform. Single-owner: parallel work must
/// derive independent seeds (see derive_seed / split), never share a stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53 bits of precision.
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n), unbiased. n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Independent stream derived from this one's seed and a tag.
    Rng split(std::uint64_t tag) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::array<std::uint64_t, 4> state_;
    std::uint64_t seed_;
};

/// Stable seed derivation for parallel and hierarchical work
/// (e.g. cell seed = derive_seed(sweep_seed, {k, replicate})).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// n independent signs, each +1 or -1 with probability 1/2. n must be >= 1.
std::vector<double> sample_rademacher(Rng& rng, std::size_t n);

}  // namespace ddlab
