#include "hyfed/digest.hpp"

#include <openssl/hmac.h>

#include "hyfed/common.hpp"

namespace hyfed {

std::array<uint8_t, 32> hmac_sha256(std::string_view key, std::string_view data) {
    std::array<uint8_t, 32> out{};
    unsigned int len = 0;
    const unsigned char* res =
        HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
             reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data(), &len);
    if (res == nullptr || len != out.size()) {
        throw Error("HMAC-SHA256 computation failed");
    }
    return out;
}

std::string to_hex(const uint8_t* data, size_t len) {
    static const char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0xf]);
    }
    return s;
}

std::string keyed_uid_hash(std::string_view client_key, std::string_view uid) {
    return to_hex(hmac_sha256(client_key, uid));
}

uint64_t keyed_seed(std::string_view key, std::string_view label) {
    const auto mac = hmac_sha256(key, label);
    uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | mac[static_cast<size_t>(i)];
    return seed;
}

}  // namespace hyfed
