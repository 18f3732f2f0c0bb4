// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace acpt {

// FNV-1a, used for content hashes (schema identity) and RNG key derivation.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
    return h;
}

// CRC-32 (IEEE 802.3, reflected 0xEDB88320), streamed. Guards the binary
// dataset and checkpoint files against truncation and bit corruption.
class Crc32 {
public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        std::uint32_t c = state_;
        for (std::size_t i = 0; i < len; ++i) {
            c = table()[(c ^ p[i]) & 0xff] ^ (c >> 8);
        }
        state_ = c;
    }

    std::uint32_t value() const { return state_ ^ 0xffffffffu; }

private:
    static const std::array<std::uint32_t, 256>& table() {
        static const std::array<std::uint32_t, 256> t = [] {
            std::array<std::uint32_t, 256> v{};
            for (std::uint32_t i = 0; i < 256; ++i) {
                std::uint32_t c = i;
                for (int k = 0; k < 8; ++k) {
                    c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
                }
                v[i] = c;
            }
            return v;
        }();
        return t;
    }

    std::uint32_t state_ = 0xffffffffu;
};

inline std::uint32_t crc32_of(std::string_view bytes) {
    Crc32 c;
    c.update(bytes.data(), bytes.size());
    return c.value();
}

} // namespace acpt
