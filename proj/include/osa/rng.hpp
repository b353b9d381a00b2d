#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace osa {

// All randomness in the library flows from one root seed through named
// substreams: substream(root, "name", index). Two call sites with different
// names (or indices) get statistically independent engines, and results do
// not depend on how work is split across threads.

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

// splitmix64 output function; full-period mixer, good avalanche.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view name,
                                           std::uint64_t index = 0) {
    return mix64(mix64(root ^ fnv1a64(name)) ^ index);
}

inline std::mt19937_64 substream(std::uint64_t root, std::string_view name,
                                 std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(root, name, index));
}

}  // namespace osa
