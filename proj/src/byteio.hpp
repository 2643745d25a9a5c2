#pragma once

// Little-endian byte packing shared by the binary file formats. Internal to
// the library; errors carry the path and byte offset of the failure.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dslab/error.hpp"

namespace dslab::byteio {

inline void put_bytes(std::vector<char>& out, const void* src, std::size_t n) {
    const char* p = static_cast<const char*>(src);
    out.insert(out.end(), p, p + n);
}

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
    const char bytes[4] = {char(v & 0xFF), char((v >> 8) & 0xFF), char((v >> 16) & 0xFF),
                           char((v >> 24) & 0xFF)};
    put_bytes(out, bytes, 4);
}

inline void put_u64(std::vector<char>& out, std::uint64_t v) {
    put_u32(out, std::uint32_t(v & 0xFFFFFFFFULL));
    put_u32(out, std::uint32_t(v >> 32));
}

inline void put_f64(std::vector<char>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline void put_f32(std::vector<char>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
public:
    Reader(std::vector<char> bytes, std::string path)
        : bytes_(std::move(bytes)), path_(std::move(path)) {}

    std::size_t offset() const { return offset_; }
    const std::string& path() const { return path_; }

    void need(std::size_t n, const char* what) {
        if (offset_ + n > bytes_.size())
            fail(ErrorCode::Truncated, path_ + ": truncated reading " + what + " at byte offset " +
                                           std::to_string(offset_) + " (need " + std::to_string(n) +
                                           " more bytes, have " +
                                           std::to_string(bytes_.size() - offset_) + ")");
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes_.data()) + offset_;
        offset_ += 4;
        return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
               std::uint32_t(p[3]) << 24;
    }

    std::uint64_t u64(const char* what) {
        const std::uint64_t lo = u32(what);
        const std::uint64_t hi = u32(what);
        return lo | hi << 32;
    }

    double f64(const char* what) {
        const std::uint64_t bits = u64(what);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(bytes_.data() + offset_, n);
        offset_ += n;
        return s;
    }

    void expect_magic(const char magic[4]) {
        need(4, "magic");
        if (std::memcmp(bytes_.data() + offset_, magic, 4) != 0)
            fail(ErrorCode::BadMagic,
                 path_ + ": bad magic at byte offset 0, expected \"" + std::string(magic, 4) +
                     "\", got \"" + std::string(bytes_.data(), 4) + "\"");
        offset_ += 4;
    }

    void expect_payload(std::size_t n, const char* what) {
        if (offset_ + n > bytes_.size())
            fail(ErrorCode::Truncated,
                 path_ + ": truncated " + what + ", expected total length " +
                     std::to_string(offset_ + n) + " bytes, actual " +
                     std::to_string(bytes_.size()));
    }

    void expect_end() {
        if (offset_ != bytes_.size())
            fail(ErrorCode::Truncated, path_ + ": " + std::to_string(bytes_.size() - offset_) +
                                           " trailing bytes at offset " + std::to_string(offset_));
    }

private:
    std::vector<char> bytes_;
    std::string path_;
    std::size_t offset_ = 0;
};

inline std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

inline void spill(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

inline void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

inline std::string slurp_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace dslab::byteio
