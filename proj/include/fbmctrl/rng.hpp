#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fbmctrl {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Gaussian stream for one (seed, stream) pair. Stream k of a given seed
// produces the same numbers no matter how many other streams exist or in
// which order they are drawn, which is what makes per-path generation
// reproducible under any scheduling.
class SubstreamRng {
public:
    SubstreamRng(std::uint64_t seed, std::uint64_t stream)
        : eng_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed2701a43c5d0bULL))) {}

    // uniform on (0, 1]
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fbmctrl
