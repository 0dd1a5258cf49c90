#ifndef GGSP_RNG_HPP
#define GGSP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace ggsp {

/// Mixes a base seed with a stream index into an independent-looking seed
/// (splitmix64 finalizer). Used to hand out per-sample / per-repetition
/// streams so results do not depend on execution order.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded random source. The variate transforms are written out explicitly
/// so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        // 53-bit mantissa from the top bits of the engine output
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is < 2^-53 for n << 2^64; acceptable here
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (deterministic, no cached spare).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Geometric on {1, 2, ...} with success probability q; q = 1 gives 1.
    std::uint64_t geometric(double q) {
        if (q >= 1.0) return 1;
        double u = uniform();
        if (u >= 1.0) u = std::nextafter(1.0, 0.0);
        return 1 + static_cast<std::uint64_t>(std::floor(std::log1p(-u) / std::log1p(-q)));
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace ggsp

#endif // GGSP_RNG_HPP
