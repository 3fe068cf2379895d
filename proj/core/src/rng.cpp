#include "ddlab/rng.hpp"

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ValueError("Rng::below: n must be > 0");
    // Lemire's nearly-divisionless bounded generation.
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<unsigned __int128>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

Rng Rng::split(std::uint64_t tag) const {
    return Rng(derive_seed(seed_, {tag}));
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = base;
    std::uint64_t acc = splitmix64(s);
    for (std::uint64_t v : path) {
        std::uint64_t t = acc ^ (v + 0x9E3779B97F4A7C15ULL);
        acc = splitmix64(t);
    }
    return acc;
}

std::vector<double> sample_rademacher(Rng& rng, std::size_t n) {
    if (n == 0) throw ValueError("sample_rademacher: n must be >= 1");
    std::vector<double> out(n);
    for (auto& v : out) v = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    return out;
}

}  // namespace ddlab
