#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"
#include "frame.hpp"

namespace lbvc {

inline constexpr double kPsnrCap = 99.0;

// 10 log10(1 / MSE) on unit-range samples, capped for (near-)exact matches.
inline double psnr(const Frame& a, const Frame& b)
{
    if (!a.same_size(b)) {
        throw GeometryError("psnr: frames differ in size");
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.samples()[i]) - b.samples()[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(a.size());
    if (mse < 1e-10) {
        return kPsnrCap;
    }
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

// Equal-weight average of two frames.
inline Frame average_frames(const Frame& a, const Frame& b)
{
    if (!a.same_size(b)) {
        throw GeometryError("average_frames: frames differ in size");
    }
    Frame out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.samples()[i] = 0.5f * (a.samples()[i] + b.samples()[i]);
    }
    return out;
}

struct RdPoint
{
    double rate = 0.0;    // bits per pixel
    double quality = 0.0; // dB
};

namespace detail {

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes) of y(x).
class Pchip
{
public:
    Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)), d_(x_.size())
    {
        const std::size_t n = x_.size();
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x_[k + 1] - x_[k];
            delta[k] = (y_[k + 1] - y_[k]) / h[k];
        }
        if (n == 2) {
            d_[0] = d_[1] = delta[0];
            return;
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (delta[k - 1] * delta[k] <= 0.0) {
                d_[k] = 0.0;
            } else {
                const double w1 = 2.0 * h[k] + h[k - 1];
                const double w2 = h[k] + 2.0 * h[k - 1];
                d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    // Exact integral of the interpolant over [a, b] within the knot range.
    double integrate(double a, double b) const
    {
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
            const double lo = std::max(a, x_[k]);
            const double hi = std::min(b, x_[k + 1]);
            if (hi > lo) {
                total += segment_integral(k, lo, hi);
            }
        }
        return total;
    }

private:
    static double end_slope(double h0, double h1, double del0, double del1)
    {
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0) {
            d = 0.0;
        } else if (del0 * del1 <= 0.0 && std::abs(d) > std::abs(3.0 * del0)) {
            d = 3.0 * del0;
        }
        return d;
    }

    // Antiderivative of the Hermite cubic on segment k, in local coordinate t = s / h.
    double segment_integral(std::size_t k, double lo, double hi) const
    {
        const double h = x_[k + 1] - x_[k];
        const double y0 = y_[k];
        const double y1 = y_[k + 1];
        const double m0 = d_[k] * h;
        const double m1 = d_[k + 1] * h;
        // p(t) = y0 + m0 t + c2 t^2 + c3 t^3
        const double c2 = 3.0 * (y1 - y0) - 2.0 * m0 - m1;
        const double c3 = 2.0 * (y0 - y1) + m0 + m1;
        const auto anti = [&](double t) {
            return h * (y0 * t + m0 * t * t / 2.0 + c2 * t * t * t / 3.0 + c3 * t * t * t * t / 4.0);
        };
        return anti((hi - x_[k]) / h) - anti((lo - x_[k]) / h);
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

inline void check_curve(std::span<const RdPoint> curve, const char* name)
{
    if (curve.size() < 4) {
        throw DataError(std::string(name) + " curve needs at least 4 points");
    }
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (!(curve[k].rate > 0.0) || !std::isfinite(curve[k].rate) || !std::isfinite(curve[k].quality)) {
            throw DataError(std::string(name) + " curve has a non-positive or non-finite point");
        }
        if (k > 0 && !(curve[k].rate > curve[k - 1].rate && curve[k].quality > curve[k - 1].quality)) {
            throw DataError(std::string(name) + " curve is not strictly increasing in rate and quality");
        }
    }
}

} // namespace detail

// Bjontegaard delta rate in percent: average rate change of `test` relative to `anchor`
// at equal quality, from monotone cubic interpolation of log10(rate) over quality.
// Points must be ordered by increasing rate.
inline double bd_rate(std::span<const RdPoint> anchor, std::span<const RdPoint> test)
{
    detail::check_curve(anchor, "anchor");
    detail::check_curve(test, "test");
    const auto interpolant = [](std::span<const RdPoint> c) {
        std::vector<double> q, lr;
        for (const RdPoint& p : c) {
            q.push_back(p.quality);
            lr.push_back(std::log10(p.rate));
        }
        return detail::Pchip(std::move(q), std::move(lr));
    };
    const double lo = std::max(anchor.front().quality, test.front().quality);
    const double hi = std::min(anchor.back().quality, test.back().quality);
    if (!(hi > lo)) {
        throw OverlapError("RD curves do not overlap in quality");
    }
    const double mean_diff = (interpolant(test).integrate(lo, hi) - interpolant(anchor).integrate(lo, hi)) / (hi - lo);
    return 100.0 * (std::pow(10.0, mean_diff) - 1.0);
}

} // namespace lbvc
