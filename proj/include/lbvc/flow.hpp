#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "frame.hpp"

namespace lbvc {

// Dense per-pixel displacement (dx, dy) in pixels; positive is right/down.
// A flow v attached to a target frame maps pixel p to p + v(p) in its reference.
class FlowField
{
public:
    FlowField() = default;

    FlowField(int width, int height, float fill_dx = 0.0f, float fill_dy = 0.0f)
        : width_(width), height_(height)
    {
        if (width <= 0 || height <= 0) {
            throw ParameterError("flow dimensions must be positive");
        }
        const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        dx_.assign(n, fill_dx);
        dy_.assign(n, fill_dy);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return dx_.size(); }

    float dx(int x, int y) const { return dx_[index(x, y)]; }
    float dy(int x, int y) const { return dy_[index(x, y)]; }
    float& dx(int x, int y) { return dx_[index(x, y)]; }
    float& dy(int x, int y) { return dy_[index(x, y)]; }

    std::span<const float> dx() const noexcept { return dx_; }
    std::span<const float> dy() const noexcept { return dy_; }
    std::span<float> dx() noexcept { return dx_; }
    std::span<float> dy() noexcept { return dy_; }

    bool same_size(const FlowField& o) const noexcept { return width_ == o.width_ && height_ == o.height_; }
    bool same_size(const Frame& f) const noexcept { return width_ == f.width() && height_ == f.height(); }

    bool all_finite() const
    {
        const auto finite = [](float v) { return std::isfinite(v); };
        return std::all_of(dx_.begin(), dx_.end(), finite) && std::all_of(dy_.begin(), dy_.end(), finite);
    }

    bool is_zero() const
    {
        const auto zero = [](float v) { return v == 0.0f; };
        return std::all_of(dx_.begin(), dx_.end(), zero) && std::all_of(dy_.begin(), dy_.end(), zero);
    }

    friend bool operator==(const FlowField&, const FlowField&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> dx_;
    std::vector<float> dy_;
};

namespace detail {

// Bilinear sample with border clamping. Written in lerp form so that a locally
// constant plane reproduces its value exactly.
inline double sample_bilinear(std::span<const float> plane, int width, int height, double x, double y)
{
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const auto at = [&](int xx, int yy) {
        return static_cast<double>(plane[static_cast<std::size_t>(yy) * static_cast<std::size_t>(width) +
                                         static_cast<std::size_t>(xx)]);
    };
    const double a = at(x0, y0);
    const double b = at(x1, y0);
    const double c = at(x0, y1);
    const double d = at(x1, y1);
    const double top = a == b ? a : a + fx * (b - a);
    const double bottom = c == d ? c : c + fx * (d - c);
    return top == bottom ? top : top + fy * (bottom - top);
}

inline void require_same(const FlowField& flow, const Frame& frame, const char* what)
{
    if (!flow.same_size(frame)) {
        throw GeometryError(std::string(what) + ": flow " + std::to_string(flow.width()) + "x" +
                            std::to_string(flow.height()) + " vs frame " + std::to_string(frame.width()) + "x" +
                            std::to_string(frame.height()));
    }
}

inline void require_same(const FlowField& a, const FlowField& b, const char* what)
{
    if (!a.same_size(b)) {
        throw GeometryError(std::string(what) + ": flow dimensions differ");
    }
}

inline void warp_plane(std::span<const float> src, std::span<float> dst, const FlowField& carrier)
{
    const int w = carrier.width();
    const int h = carrier.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            dst[i] = static_cast<float>(
                sample_bilinear(src, w, h, x + static_cast<double>(carrier.dx()[i]), y + static_cast<double>(carrier.dy()[i])));
        }
    }
}

} // namespace detail

// Backward warp: out(p) = source(p + flow(p)), bilinear, border-clamped, clamped to [0,1].
inline Frame warp_image(const Frame& source, const FlowField& flow)
{
    detail::require_same(flow, source, "warp_image");
    Frame out(source.width(), source.height());
    detail::warp_plane(source.samples(), out.samples(), flow);
    for (float& s : out.samples()) {
        s = std::clamp(s, 0.0f, 1.0f);
    }
    return out;
}

// Backward-warps both channels of target_flow along carrier_flow. Flow values are not clamped.
inline FlowField warp_flow(const FlowField& target_flow, const FlowField& carrier_flow)
{
    detail::require_same(target_flow, carrier_flow, "warp_flow");
    FlowField out(target_flow.width(), target_flow.height());
    detail::warp_plane(target_flow.dx(), out.dx(), carrier_flow);
    detail::warp_plane(target_flow.dy(), out.dy(), carrier_flow);
    return out;
}

inline FlowField add_flows(const FlowField& a, const FlowField& b)
{
    detail::require_same(a, b, "add_flows");
    FlowField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.dx()[i] += b.dx()[i];
        out.dy()[i] += b.dy()[i];
    }
    return out;
}

inline FlowField subtract_flows(const FlowField& a, const FlowField& b)
{
    detail::require_same(a, b, "subtract_flows");
    FlowField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.dx()[i] -= b.dx()[i];
        out.dy()[i] -= b.dy()[i];
    }
    return out;
}

// Chains a flow into an already-accumulated one:
//   v_{k->0} = W(v_{k-1->0}, v_{k->k-1}) + v_{k->k-1}
// where prev_accumulated is v_{k-1->0} and local is v_{k->k-1}.
inline FlowField compose_flows(const FlowField& prev_accumulated, const FlowField& local)
{
    return add_flows(warp_flow(prev_accumulated, local), local);
}

// Motion intensity factor: mean per-pixel displacement magnitude.
inline double mif(const FlowField& flow)
{
    if (flow.size() == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < flow.size(); ++i) {
        const double x = flow.dx()[i];
        const double y = flow.dy()[i];
        sum += std::sqrt(x * x + y * y);
    }
    return sum / static_cast<double>(flow.size());
}

inline FlowField scale_flow(const FlowField& flow, double s)
{
    if (!std::isfinite(s)) {
        throw ParameterError("scale_flow: non-finite scale");
    }
    FlowField out = flow;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.dx()[i] = static_cast<float>(out.dx()[i] * s);
        out.dy()[i] = static_cast<float>(out.dy()[i] * s);
    }
    return out;
}

// Bilinear resampling of both channels onto a target grid (pixel centres aligned),
// with displacements rescaled by the grid ratio along each axis.
inline FlowField resample_flow(const FlowField& flow, int target_width, int target_height)
{
    if (target_width <= 0 || target_height <= 0) {
        throw ParameterError("resample_flow: target dimensions must be positive");
    }
    if (target_width == flow.width() && target_height == flow.height()) {
        return flow;
    }
    const double rx = static_cast<double>(flow.width()) / target_width;
    const double ry = static_cast<double>(flow.height()) / target_height;
    const double sx = static_cast<double>(target_width) / flow.width();
    const double sy = static_cast<double>(target_height) / flow.height();
    FlowField out(target_width, target_height);
    for (int y = 0; y < target_height; ++y) {
        const double src_y = (y + 0.5) * ry - 0.5;
        for (int x = 0; x < target_width; ++x) {
            const double src_x = (x + 0.5) * rx - 0.5;
            out.dx(x, y) = static_cast<float>(
                sx * detail::sample_bilinear(flow.dx(), flow.width(), flow.height(), src_x, src_y));
            out.dy(x, y) = static_cast<float>(
                sy * detail::sample_bilinear(flow.dy(), flow.width(), flow.height(), src_x, src_y));
        }
    }
    return out;
}

// Mean Euclidean distance between two flows, ignoring a border band of `margin` pixels.
inline double mean_endpoint_error(const FlowField& a, const FlowField& b, int margin = 0)
{
    detail::require_same(a, b, "mean_endpoint_error");
    const int x0 = std::min(margin, a.width() / 2);
    const int y0 = std::min(margin, a.height() / 2);
    const int x1 = std::max(a.width() - margin, x0 + 1);
    const int y1 = std::max(a.height() - margin, y0 + 1);
    double sum = 0.0;
    long count = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double ex = static_cast<double>(a.dx(x, y)) - b.dx(x, y);
            const double ey = static_cast<double>(a.dy(x, y)) - b.dy(x, y);
            sum += std::sqrt(ex * ex + ey * ey);
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

} // namespace lbvc
