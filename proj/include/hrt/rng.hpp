#pragma once

#include <cstdint>
#include <random>

namespace hrt {

/// Engine used for every simulation in the library.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash of a master seed and a tuple of stream coordinates.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) noexcept {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (c + 0x85157af5ULL));
    return h;
}

/**
 * @brief Engine for replication @p index of stream @p stream under master @p seed.
 *
 * Each replication owns an independently seeded engine, so the draws of a
 * replication do not depend on which worker runs it or in which order.
 */
inline Engine substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t k = stream_key(seed, stream, index);
    std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream)};
    return Engine(seq);
}

/// Stable 64-bit FNV-1a hash of a string, used to derive stream ids from names.
constexpr std::uint64_t name_hash(const char* s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s != '\0'; ++s) {
        h ^= static_cast<unsigned char>(*s);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace hrt
