#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

namespace cgtest {

inline std::filesystem::path fixtures_dir() {
    return std::filesystem::path(CODEGREEN_TEST_FIXTURES);
}

// Scratch space under the build tree; /tmp may be mounted noexec, and some
// tests execute compiled fixtures from their scratch dirs.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::path(CODEGREEN_TEST_TMPDIR) /
                (tag + "-" + std::to_string(rng() & 0xffffff));
        std::filesystem::create_directories(path_);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const { return path_; }
    operator const std::filesystem::path&() const { return path_; }

private:
    std::filesystem::path path_;
};

class EnvGuard {
public:
    EnvGuard(const std::string& name, const std::string& value) : name_(name) {
        if (const char* old = std::getenv(name.c_str()))
            old_ = old;
        ::setenv(name.c_str(), value.c_str(), 1);
    }

    ~EnvGuard() {
        if (old_)
            ::setenv(name_.c_str(), old_->c_str(), 1);
        else
            ::unsetenv(name_.c_str());
    }

private:
    std::string name_;
    std::optional<std::string> old_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace cgtest
