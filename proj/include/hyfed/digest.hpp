#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyfed {

// FNV-1a 64-bit. Platform-independent content hash for cache fingerprints
// and the hashing embedder.
inline uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// HMAC-SHA256 over data with the given key (OpenSSL-backed).
std::array<uint8_t, 32> hmac_sha256(std::string_view key, std::string_view data);

std::string to_hex(const uint8_t* data, size_t len);

template <size_t N>
std::string to_hex(const std::array<uint8_t, N>& a) {
    return to_hex(a.data(), N);
}

// Keyed 256-bit uid hash, hex-encoded. Stable within one client key,
// unlinkable across keys.
std::string keyed_uid_hash(std::string_view client_key, std::string_view uid);

// First 8 bytes of HMAC-SHA256(key, label), big-endian. Seeds the keyed
// streams in the feature-sealing transform.
uint64_t keyed_seed(std::string_view key, std::string_view label);

}  // namespace hyfed
