#pragma once

// Small helpers shared by the test suites.

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "dslab/error.hpp"

namespace testutil {

/// Runs fn, which must throw dslab::Error, and returns the carried code.
template <typename Fn>
dslab::ErrorCode error_code_of(Fn&& fn) {
    try {
        std::forward<Fn>(fn)();
    } catch (const dslab::Error& e) {
        return e.code();
    } catch (...) {
        FAIL("expected dslab::Error, got a different exception type");
    }
    FAIL("expected dslab::Error, nothing was thrown");
    return dslab::ErrorCode::InvalidArgument;
}

/// Self-cleaning scratch directory under the system temp root.
class TmpDir {
public:
    TmpDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("dslab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TmpDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TmpDir(const TmpDir&) = delete;
    TmpDir& operator=(const TmpDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_bytes(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(bool(out));
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    REQUIRE(bool(out));
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil
