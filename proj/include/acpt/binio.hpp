// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "acpt/common.hpp"
#include "acpt/hash.hpp"

namespace acpt {

// Little-endian binary encoding, independent of host byte order. Files built
// here are checksummed with a trailing CRC-32 and written atomically
// (temp file + rename).

class BinWriter {
public:
    void u8(std::uint8_t v) { byte(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void bytes(std::string_view s) { buf_.append(s); }

    void str16(std::string_view s) {
        if (s.size() > 0xffff) throw ValidationError("binio: string too long");
        u16(static_cast<std::uint16_t>(s.size()));
        bytes(s);
    }

    // Appends the CRC of everything written so far, then writes atomically.
    void finish_to_file(const std::filesystem::path& path) {
        const std::uint32_t crc = crc32_of(buf_);
        u32(crc);
        const std::filesystem::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw ValidationError("cannot open for writing: " + tmp.string());
            out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
            if (!out) throw ValidationError("write failed: " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    }

    const std::string& buffer() const { return buf_; }
    std::string take_buffer_with_crc() {
        u32(crc32_of(buf_));
        return std::move(buf_);
    }

private:
    void byte(std::uint8_t b) { buf_.push_back(static_cast<char>(b)); }
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) byte(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }

    std::string buf_;
};

class BinReader {
public:
    explicit BinReader(std::string data, std::string name = "<memory>")
        : data_(std::move(data)), name_(std::move(name)) {
        if (data_.size() < 4) throw IntegrityError(name_ + ": truncated file");
        const std::string_view body(data_.data(), data_.size() - 4);
        const std::uint32_t want = le32(data_.data() + data_.size() - 4);
        if (crc32_of(body) != want) {
            throw IntegrityError(name_ + ": checksum mismatch (corrupt or truncated)");
        }
        end_ = data_.size() - 4;
    }

    static BinReader from_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ValidationError("cannot open: " + path.string());
        std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return BinReader(std::move(data), path.string());
    }

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::string str16() {
        const std::size_t n = u16();
        return std::string(take(n));
    }

    std::string_view raw(std::size_t n) { return take(n); }

    bool at_end() const { return pos_ == end_; }

    void expect_end() const {
        if (!at_end()) throw IntegrityError(name_ + ": trailing bytes after payload");
    }

private:
    std::string_view take(std::size_t n) {
        if (end_ - pos_ < n) throw IntegrityError(name_ + ": truncated payload");
        std::string_view v(data_.data() + pos_, n);
        pos_ += n;
        return v;
    }

    std::uint64_t le(int n) {
        const std::string_view v = take(static_cast<std::size_t>(n));
        std::uint64_t out = 0;
        for (int i = 0; i < n; ++i) {
            out |= static_cast<std::uint64_t>(static_cast<unsigned char>(v[static_cast<std::size_t>(i)]))
                   << (8 * i);
        }
        return out;
    }

    static std::uint32_t le32(const char* p) {
        std::uint32_t out = 0;
        for (int i = 0; i < 4; ++i) {
            out |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        }
        return out;
    }

    std::string data_;
    std::string name_;
    std::size_t pos_ = 0;
    std::size_t end_ = 0;
};

} // namespace acpt
