#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lbvc.hpp"

namespace testutil {

// Per-test scratch directory under the system temp dir.
class TempDir
{
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("lbvc_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::vector<unsigned char>& bytes)
{
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Mean endpoint error against a constant flow over the pixels at least `margin` from every edge.
inline double interior_epe(const lbvc::FlowField& f, double dx, double dy, int margin)
{
    double s = 0.0;
    long n = 0;
    for (int y = margin; y < f.height() - margin; ++y) {
        for (int x = margin; x < f.width() - margin; ++x) {
            s += std::hypot(f.dx(x, y) - dx, f.dy(x, y) - dy);
            ++n;
        }
    }
    return s / static_cast<double>(n);
}

inline lbvc::FlowField random_flow(int w, int h, double lo, double hi, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> d(static_cast<float>(lo), static_cast<float>(hi));
    lbvc::FlowField f(w, h);
    for (float& v : f.dx()) {
        v = d(rng);
    }
    for (float& v : f.dy()) {
        v = d(rng);
    }
    return f;
}

} // namespace testutil
