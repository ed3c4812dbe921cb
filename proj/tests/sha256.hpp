#pragma once

#include <openssl/sha.h>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace testsupport {

inline std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
    unsigned char h[SHA256_DIGEST_LENGTH];
    SHA256(bytes.data(), bytes.size(), h);
    std::string out;
    char buf[3];
    for (unsigned char c : h) {
        std::snprintf(buf, sizeof buf, "%02x", c);
        out += buf;
    }
    return out;
}

}  // namespace testsupport
