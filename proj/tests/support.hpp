// Scratch directories for tests that touch the filesystem.
#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "stancelab/util.hpp"

namespace testing_support {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("stancelab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

    std::filesystem::path write(const std::string& name, const std::string& content) const {
        stancelab::write_file(path_ / name, content);
        return path_ / name;
    }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
