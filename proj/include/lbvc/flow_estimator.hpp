#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "frame.hpp"

namespace lbvc {

struct EstimatorParams
{
    int pyramid_levels = 5;
    int iterations_per_level = 60;
    // Horn-Schunck alpha; image derivatives are taken on the 8-bit intensity scale.
    double smoothness_weight = 15.0;
    static constexpr int downscale_ratio = 2;

    void validate() const
    {
        if (pyramid_levels < 1 || iterations_per_level < 1 || !(smoothness_weight >= 0.0)) {
            throw ParameterError("invalid estimator parameters");
        }
    }

    friend bool operator==(const EstimatorParams&, const EstimatorParams&) = default;
};

// Dense two-frame flow backend. estimate() returns v such that reference(p + v(p)) ~ target(p).
// estimate_residual() returns a correction r such that base + r is such a flow.
class FlowBackend
{
public:
    virtual ~FlowBackend() = default;

    virtual FlowField estimate_residual(const Frame& target, const Frame& reference, const FlowField& base,
                                        const EstimatorParams& params) const = 0;

    FlowField estimate(const Frame& target, const Frame& reference, const EstimatorParams& params) const
    {
        return estimate_residual(target, reference, FlowField(target.width(), target.height()), params);
    }
};

// Coarse-to-fine Horn-Schunck with one warp per pyramid level and Jacobi sweeps.
// Pixels whose displaced position leaves the reference get no data term and are filled
// in by the smoothness term.
class HornSchunckBackend final : public FlowBackend
{
public:
    FlowField estimate_residual(const Frame& target, const Frame& reference, const FlowField& base,
                                const EstimatorParams& params) const override
    {
        params.validate();
        if (!target.same_size(reference)) {
            throw GeometryError("estimate: target and reference differ in size");
        }
        detail::require_same(base, target, "estimate");
        const int levels = usable_levels(target.width(), target.height(), params.pyramid_levels);

        std::vector<Frame> tgt_pyr{target};
        std::vector<Frame> ref_pyr{reference};
        for (int l = 1; l < levels; ++l) {
            tgt_pyr.push_back(downsample_frame(tgt_pyr.back(), EstimatorParams::downscale_ratio));
            ref_pyr.push_back(downsample_frame(ref_pyr.back(), EstimatorParams::downscale_ratio));
        }

        FlowField residual(tgt_pyr.back().width(), tgt_pyr.back().height());
        for (int l = levels - 1; l >= 0; --l) {
            const Frame& t = tgt_pyr[static_cast<std::size_t>(l)];
            residual = resample_flow(residual, t.width(), t.height());
            const FlowField base_l = l == 0 ? base : resample_flow(base, t.width(), t.height());
            residual = solve_level(t, ref_pyr[static_cast<std::size_t>(l)], base_l, residual, params);
        }
        return residual;
    }

    static int usable_levels(int width, int height, int requested)
    {
        int levels = std::max(1, requested);
        while (levels > 1 && std::min(width, height) < (1 << (levels - 1))) {
            --levels;
        }
        return levels;
    }

private:
    // Seeds pixels without a data term from their observed neighbours, one ring at a time,
    // so the smoothness sweeps start from a flat extension instead of a stale coarse guess.
    static void fill_unobserved(std::vector<double>& u, std::vector<double>& v,
                                const std::vector<unsigned char>& valid, int w, int h)
    {
        std::vector<unsigned char> known = valid;
        if (std::find(known.begin(), known.end(), 1) == known.end()) {
            return;
        }
        std::vector<std::size_t> ring;
        for (;;) {
            ring.clear();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    if (known[i]) {
                        continue;
                    }
                    const bool touches = (x > 0 && known[i - 1]) || (x + 1 < w && known[i + 1]) ||
                                         (y > 0 && known[i - w]) || (y + 1 < h && known[i + w]);
                    if (touches) {
                        ring.push_back(i);
                    }
                }
            }
            if (ring.empty()) {
                break;
            }
            std::vector<double> ru(ring.size()), rv(ring.size());
            for (std::size_t k = 0; k < ring.size(); ++k) {
                const std::size_t i = ring[k];
                const int x = static_cast<int>(i % static_cast<std::size_t>(w));
                const int y = static_cast<int>(i / static_cast<std::size_t>(w));
                double su = 0.0, sv = 0.0;
                int count = 0;
                const auto take = [&](std::size_t j) {
                    if (known[j]) {
                        su += u[j];
                        sv += v[j];
                        ++count;
                    }
                };
                if (x > 0) take(i - 1);
                if (x + 1 < w) take(i + 1);
                if (y > 0) take(i - w);
                if (y + 1 < h) take(i + w);
                ru[k] = su / count;
                rv[k] = sv / count;
            }
            for (std::size_t k = 0; k < ring.size(); ++k) {
                u[ring[k]] = ru[k];
                v[ring[k]] = rv[k];
                known[ring[k]] = 1;
            }
        }
    }

    // One linearisation at base + init followed by Jacobi sweeps on the residual.
    static FlowField solve_level(const Frame& target, const Frame& reference, const FlowField& base,
                                 const FlowField& init, const EstimatorParams& params)
    {
        const int w = target.width();
        const int h = target.height();
        const std::size_t n = target.size();
        const FlowField total = add_flows(base, init);
        const Frame warped = warp_image(reference, total);

        constexpr double kScale = 255.0;
        std::vector<double> ix(n), iy(n), it(n), denom(n);
        std::vector<unsigned char> valid(n);
        const double alpha2 = params.smoothness_weight * params.smoothness_weight;
        const auto grad = [](const Frame& f, int x, int y, int ddx, int ddy) {
            const int xa = std::clamp(x - ddx, 0, f.width() - 1);
            const int xb = std::clamp(x + ddx, 0, f.width() - 1);
            const int ya = std::clamp(y - ddy, 0, f.height() - 1);
            const int yb = std::clamp(y + ddy, 0, f.height() - 1);
            return 0.5 * (static_cast<double>(f(xb, yb)) - f(xa, ya));
        };
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const double sx = x + static_cast<double>(total.dx()[i]);
                const double sy = y + static_cast<double>(total.dy()[i]);
                valid[i] = sx >= 0.0 && sx <= w - 1 && sy >= 0.0 && sy <= h - 1;
                ix[i] = kScale * 0.5 * (grad(target, x, y, 1, 0) + grad(warped, x, y, 1, 0));
                iy[i] = kScale * 0.5 * (grad(target, x, y, 0, 1) + grad(warped, x, y, 0, 1));
                it[i] = kScale * (static_cast<double>(warped(x, y)) - target(x, y));
                denom[i] = alpha2 + ix[i] * ix[i] + iy[i] * iy[i];
            }
        }

        std::vector<double> u0(init.dx().begin(), init.dx().end());
        std::vector<double> v0(init.dy().begin(), init.dy().end());
        fill_unobserved(u0, v0, valid, w, h);
        std::vector<double> u = u0, v = v0, un(n), vn(n);
        for (int iter = 0; iter < params.iterations_per_level; ++iter) {
            for (int y = 0; y < h; ++y) {
                const int ym = std::max(y - 1, 0);
                const int yp = std::min(y + 1, h - 1);
                for (int x = 0; x < w; ++x) {
                    const int xm = std::max(x - 1, 0);
                    const int xp = std::min(x + 1, w - 1);
                    const auto avg = [&](const std::vector<double>& f) {
                        const auto at = [&](int xx, int yy) { return f[static_cast<std::size_t>(yy) * w + xx]; };
                        return (at(xm, y) + at(xp, y) + at(x, ym) + at(x, yp)) / 6.0 +
                               (at(xm, ym) + at(xp, ym) + at(xm, yp) + at(xp, yp)) / 12.0;
                    };
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    const double ubar = avg(u);
                    const double vbar = avg(v);
                    if (valid[i] && denom[i] > 0.0) {
                        const double t = (ix[i] * (ubar - u0[i]) + iy[i] * (vbar - v0[i]) + it[i]) / denom[i];
                        un[i] = ubar - ix[i] * t;
                        vn[i] = vbar - iy[i] * t;
                    } else {
                        un[i] = ubar;
                        vn[i] = vbar;
                    }
                }
            }
            u.swap(un);
            v.swap(vn);
        }

        FlowField out(w, h);
        for (std::size_t i = 0; i < n; ++i) {
            out.dx()[i] = static_cast<float>(u[i]);
            out.dy()[i] = static_cast<float>(v[i]);
        }
        return out;
    }
};

inline const FlowBackend& default_backend()
{
    static const HornSchunckBackend backend;
    return backend;
}

inline FlowField estimate(const Frame& target, const Frame& reference, const EstimatorParams& params = {},
                          const FlowBackend& backend = default_backend())
{
    return backend.estimate(target, reference, params);
}

namespace detail {

// Mean absolute warp residual over pixels whose displaced position lands inside the frame.
inline double masked_warp_error(const Frame& target, const Frame& reference, const FlowField& flow)
{
    const Frame warped = warp_image(reference, flow);
    double sum = 0.0;
    long count = 0;
    for (int y = 0; y < target.height(); ++y) {
        for (int x = 0; x < target.width(); ++x) {
            const double sx = x + static_cast<double>(flow.dx(x, y));
            const double sy = y + static_cast<double>(flow.dy(x, y));
            if (sx < 0.0 || sy < 0.0 || sx > target.width() - 1 || sy > target.height() - 1) {
                continue;
            }
            sum += std::abs(static_cast<double>(warped(x, y)) - target(x, y));
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

} // namespace detail

// Corrects an accumulated flow: a residual flow is estimated between the target and the
// reference as seen through the accumulated flow, and added back. The residual is dropped
// where the accumulated flow points outside the reference, and the whole correction is
// rejected if it does not lower the warp residual.
inline FlowField refine(const FlowField& accumulated, const Frame& target, const Frame& reference,
                        const EstimatorParams& params = {}, const FlowBackend& backend = default_backend())
{
    if (!target.same_size(reference)) {
        throw GeometryError("refine: target and reference differ in size");
    }
    detail::require_same(accumulated, target, "refine");

    EstimatorParams reduced = params;
    reduced.pyramid_levels = std::max(1, params.pyramid_levels - 2);
    FlowField residual = backend.estimate_residual(target, reference, accumulated, reduced);

    const int w = target.width();
    const int h = target.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double sx = x + static_cast<double>(accumulated.dx(x, y));
            const double sy = y + static_cast<double>(accumulated.dy(x, y));
            if (sx < 0.0 || sy < 0.0 || sx > w - 1 || sy > h - 1) {
                residual.dx(x, y) = 0.0f;
                residual.dy(x, y) = 0.0f;
            }
        }
    }
    FlowField refined = add_flows(accumulated, residual);
    if (detail::masked_warp_error(target, reference, refined) >
        detail::masked_warp_error(target, reference, accumulated)) {
        return accumulated;
    }
    return refined;
}

} // namespace lbvc
