#pragma once

#include <cstdint>
#include <string_view>

namespace dai {

using Digest = std::uint64_t;

// 64-bit FNV-1a.
inline Digest fnv1a(std::string_view bytes, Digest seed = 0xcbf29ce484222325ULL) {
    Digest h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline Digest mix_digest(Digest a, Digest b) {
    // boost::hash_combine style, widened to 64 bits
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 12) + (a >> 4);
    return a;
}

} // namespace dai
