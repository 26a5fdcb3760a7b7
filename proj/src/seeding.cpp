#include "netpolicy/seeding.hpp"

#include <cmath>

namespace netpolicy {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
    return splitmix64(splitmix64(parent) ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
    // FNV-1a over the label, then mixed like a numeric tag.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return derive_seed(parent, h);
}

double uniform01(Rng& rng) {
    // 53 random bits; avoids the implementation-defined generate_canonical.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
    // Marsaglia polar method, so streams are identical across standard libraries.
    for (;;) {
        double u = 2.0 * uniform01(rng) - 1.0;
        double v = 2.0 * uniform01(rng) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace netpolicy
