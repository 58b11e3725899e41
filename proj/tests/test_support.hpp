#pragma once

#include "nbgraph/vectorstore.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

namespace nbgraph::test {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("nbgraph_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline VectorDataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                                    double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, static_cast<float>(scale));
    std::vector<float> values(n * d);
    for (float& v : values) {
        v = normal(rng);
    }
    return VectorDataset(n, d, std::move(values), "random");
}

} // namespace nbgraph::test
