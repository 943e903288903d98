#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "flow.hpp"
#include "frame.hpp"

namespace lbvc::synthetic {

// Procedural multi-octave value noise defined on the whole plane, so translated crops
// of it form exact global-motion sequences with known flow.
class Texture
{
public:
    explicit Texture(std::uint32_t seed = 1) : seed_(seed) {}

    double operator()(double x, double y) const
    {
        static constexpr double kSpacing[] = {32.0, 16.0, 8.0, 4.0};
        static constexpr double kAmplitude[] = {0.40, 0.25, 0.20, 0.10};
        double v = 0.5;
        for (int o = 0; o < 4; ++o) {
            v += kAmplitude[o] * (lattice(x / kSpacing[o], y / kSpacing[o], static_cast<std::uint32_t>(o)) - 0.5);
        }
        return std::clamp(v, 0.0, 1.0);
    }

private:
    static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

    double node(std::int64_t ix, std::int64_t iy, std::uint32_t octave) const
    {
        std::uint64_t h = static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ull ^
                          static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4Full ^
                          (static_cast<std::uint64_t>(seed_) << 32 | octave) * 0x165667B19E3779F9ull;
        h ^= h >> 33;
        h *= 0xFF51AFD7ED558CCDull;
        h ^= h >> 33;
        h *= 0xC4CEB9FE1A85EC53ull;
        h ^= h >> 33;
        return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
    }

    double lattice(double x, double y, std::uint32_t octave) const
    {
        const double fx = std::floor(x);
        const double fy = std::floor(y);
        const auto ix = static_cast<std::int64_t>(fx);
        const auto iy = static_cast<std::int64_t>(fy);
        const double tx = smooth(x - fx);
        const double ty = smooth(y - fy);
        const double a = node(ix, iy, octave);
        const double b = node(ix + 1, iy, octave);
        const double c = node(ix, iy + 1, octave);
        const double d = node(ix + 1, iy + 1, octave);
        const double top = a + tx * (b - a);
        const double bottom = c + tx * (d - c);
        return top + ty * (bottom - top);
    }

    std::uint32_t seed_;
};

// Texture sampled with its origin displaced by (offset_x, offset_y): content appears
// moved right/down by the offset.
inline Frame render(const Texture& tex, int width, int height, double offset_x, double offset_y)
{
    Frame f(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            f(x, y) = static_cast<float>(tex(x - offset_x, y - offset_y));
        }
    }
    return f;
}

// Frame t is the texture translated by t * (step_x, step_y).
inline VideoSequence pan_sequence(int width, int height, int frames, double step_x, double step_y = 0.0,
                                  std::uint32_t seed = 1)
{
    const Texture tex(seed);
    VideoSequence seq;
    for (int t = 0; t < frames; ++t) {
        seq.frames.push_back(render(tex, width, height, t * step_x, t * step_y));
    }
    return seq;
}

// Ground-truth flow from frame t to frame t + distance in a pan sequence.
inline FlowField pan_flow(int width, int height, int distance, double step_x, double step_y = 0.0)
{
    return FlowField(width, height, static_cast<float>(distance * step_x), static_cast<float>(distance * step_y));
}

inline Frame noise_frame(int width, int height, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    Frame f(width, height);
    for (float& s : f.samples()) {
        s = dist(rng);
    }
    return f;
}

// Independent Gaussian sensor noise per sample, clamped back to [0, 1].
inline VideoSequence add_noise(VideoSequence seq, double sigma, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<float> dist(0.0f, static_cast<float>(sigma));
    for (Frame& f : seq.frames) {
        for (float& s : f.samples()) {
            s = std::clamp(s + dist(rng), 0.0f, 1.0f);
        }
    }
    return seq;
}

// Rotation about the frame centre by `degrees`, expressed as the backward flow from the
// rotated frame to the unrotated one.
inline FlowField rotation_flow(int width, int height, double degrees)
{
    const double a = degrees * 3.14159265358979323846 / 180.0;
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    const double c = std::cos(-a);
    const double s = std::sin(-a);
    FlowField flow(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double rx = x - cx;
            const double ry = y - cy;
            flow.dx(x, y) = static_cast<float>(c * rx - s * ry - rx);
            flow.dy(x, y) = static_cast<float>(s * rx + c * ry - ry);
        }
    }
    return flow;
}

} // namespace lbvc::synthetic
