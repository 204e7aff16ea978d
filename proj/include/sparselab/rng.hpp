#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "sparselab/matrix.hpp"

namespace sparselab {

// Deterministic seeded generator: splitmix64-expanded seed feeding
// xoshiro256++. Identical seed and call sequence give identical draws on any
// platform (integer core; floating-point draws only use exact power-of-two
// scaling).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
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

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via 128-bit multiply.
    Index uniform_index(Index n) {
        return static_cast<Index>((static_cast<__uint128_t>(next_u64()) * static_cast<__uint128_t>(n)) >> 64);
    }

    // Box-Muller with cached spare.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    // Independent child stream; distinct tags give decorrelated streams.
    Rng child(std::uint64_t tag) {
        std::uint64_t x = next_u64() ^ (tag * 0x9e3779b97f4a7c15ULL);
        return Rng(splitmix64(x));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (Index i = static_cast<Index>(v.size()) - 1; i > 0; --i) {
            const Index j = uniform_index(i + 1);
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
        }
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
    bool have_spare_;
    double spare_;
};

inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols, double stddev = 1.0, double mean = 0.0) {
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m[i] = rng.gaussian(mean, stddev);
    return m;
}

}  // namespace sparselab
