#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace netpolicy {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for a labelled sub-stream. Used for the master -> replication ->
// cluster -> period hierarchy so results never depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t first, std::uint64_t second, Tags... rest) {
    return derive_seed(derive_seed(parent, first), second, rest...);
}

// Tags for the per-cluster period streams.
namespace stream {
inline constexpr std::uint64_t assignment = 0xA551;
inline constexpr std::uint64_t noise = 0x9015E;
inline constexpr std::uint64_t sampling = 0x5A3D;
inline constexpr std::uint64_t shock = 0x5B0C;
}  // namespace stream

double uniform01(Rng& rng);
double standard_normal(Rng& rng);

}  // namespace netpolicy
