#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace lbvc {

// Single-channel luminance plane with samples in [0, 1], row-major.
class Frame
{
public:
    Frame() = default;

    Frame(int width, int height, float fill = 0.0f) : width_(width), height_(height)
    {
        check_dims(width, height);
        samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Frame(int width, int height, std::vector<float> samples)
        : width_(width), height_(height), samples_(std::move(samples))
    {
        check_dims(width, height);
        if (samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw GeometryError("frame sample count does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
        }
        for (float s : samples_) {
            if (!(s >= 0.0f && s <= 1.0f)) {
                throw ParameterError("frame sample outside [0,1]");
            }
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    float operator()(int x, int y) const { return samples_[index(x, y)]; }
    float& operator()(int x, int y) { return samples_[index(x, y)]; }

    std::span<const float> samples() const noexcept { return samples_; }
    std::span<float> samples() noexcept { return samples_; }

    bool same_size(const Frame& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    double mean() const
    {
        double sum = 0.0;
        for (float s : samples_) {
            sum += s;
        }
        return samples_.empty() ? 0.0 : sum / static_cast<double>(samples_.size());
    }

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    static void check_dims(int width, int height)
    {
        if (width <= 0 || height <= 0) {
            throw ParameterError("frame dimensions must be positive");
        }
    }

    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> samples_;
};

struct VideoSequence
{
    std::vector<Frame> frames;
    double frame_rate = 25.0;

    std::size_t size() const noexcept { return frames.size(); }
    const Frame& operator[](std::size_t i) const { return frames[i]; }
    int width() const { return frames.empty() ? 0 : frames.front().width(); }
    int height() const { return frames.empty() ? 0 : frames.front().height(); }

    void validate() const
    {
        if (frames.empty()) {
            throw ParameterError("video sequence is empty");
        }
        for (const Frame& f : frames) {
            if (!f.same_size(frames.front())) {
                throw GeometryError("video sequence frames differ in size");
            }
        }
    }
};

// Box-filter decimation. Output is ceil(w/factor) x ceil(h/factor); partial edge
// blocks average only the pixels they cover.
inline Frame downsample_frame(const Frame& frame, int factor)
{
    if (factor < 1 || factor > std::min(frame.width(), frame.height())) {
        throw ParameterError("downsample factor " + std::to_string(factor) + " invalid for " +
                             std::to_string(frame.width()) + "x" + std::to_string(frame.height()));
    }
    if (factor == 1) {
        return frame;
    }
    const int ow = (frame.width() + factor - 1) / factor;
    const int oh = (frame.height() + factor - 1) / factor;
    Frame out(ow, oh);
    for (int by = 0; by < oh; ++by) {
        const int y0 = by * factor;
        const int y1 = std::min(y0 + factor, frame.height());
        for (int bx = 0; bx < ow; ++bx) {
            const int x0 = bx * factor;
            const int x1 = std::min(x0 + factor, frame.width());
            double sum = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    sum += frame(x, y);
                }
            }
            const double mean = sum / static_cast<double>((y1 - y0) * (x1 - x0));
            out(bx, by) = static_cast<float>(std::clamp(mean, 0.0, 1.0));
        }
    }
    return out;
}

} // namespace lbvc
