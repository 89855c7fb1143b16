#pragma once

#include <cstdint>

namespace dvs::detail {

// Stateless 64-bit mixer. Used both as a hash for deriving independent
// sub-seeds and as a counter-based generator for per-cell noise draws,
// which keeps stochastic kernels deterministic under any thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b ^ 0xD1B54A32D192ED03ull));
}

// Uniform double in (0, 1] from a hash value (never zero, safe for log()).
inline double to_unit_open(std::uint64_t h) {
    return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

// Uniform double in [0, 1).
inline double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace dvs::detail
