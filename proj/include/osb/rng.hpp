#ifndef OSB_RNG_HPP
#define OSB_RNG_HPP

#include "osb/types.hpp"

#include <cmath>
#include <cstdint>

namespace osb {

// Counter-based deterministic generator (splitmix64). Identical streams on
// every platform, cheap to fork per shard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // standard normal via Box-Muller (avoids std::normal_distribution, whose
    // stream is implementation-defined)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Vector gaussian_vector(int dim) {
        Vector v(dim);
        for (int i = 0; i < dim; ++i) v[i] = gaussian();
        return v;
    }

    // random direction on the unit sphere
    Vector direction(int dim) {
        Vector v = gaussian_vector(dim);
        double n = v.norm();
        while (n < 1e-12) {
            v = gaussian_vector(dim);
            n = v.norm();
        }
        return v / n;
    }

    // Decorrelated substream: the child state is a full hash of (seed,
    // stream), so sibling streams never shift-align with each other.
    static Rng fork(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix(seed + 0x9e3779b97f4a7c15ull * (stream + 1)) ^
                   mix(stream ^ 0xda942042e4dd58b5ull));
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace osb

#endif
