#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "flow_estimator.hpp"
#include "frame.hpp"

namespace lbvc {

enum class AmeMode { Direct, Accumulated };

inline std::string_view to_string(AmeMode m)
{
    return m == AmeMode::Direct ? "direct" : "accumulated";
}

// Which estimator the adaptive module may use. Adaptive is the gated behaviour; the
// forced policies exist for ablations.
enum class AmePolicy { Adaptive, DirectOnly, AccumulateOnly };

struct AmeConfig
{
    double mif_threshold = 10.0;
    EstimatorParams estimator{};
    bool refine_each_step = true;
    AmePolicy policy = AmePolicy::Adaptive;

    void validate() const
    {
        if (!(mif_threshold > 0.0)) {
            throw ParameterError("MIF threshold must be positive");
        }
        estimator.validate();
    }
};

struct AmeResult
{
    FlowField flow_fwd; // current frame -> past reference
    FlowField flow_bwd; // current frame -> future reference
    AmeMode mode = AmeMode::Direct;
    double mif_fwd = 0.0; // of the unrefined accumulated flows (0 for adjacent references)
    double mif_bwd = 0.0;

    double mean_mif() const { return 0.5 * (mif_fwd + mif_bwd); }
};

namespace detail {

inline FlowField accumulate(std::span<const Frame> chain, const AmeConfig& cfg, bool refine_steps)
{
    if (chain.size() < 2) {
        throw ParameterError("accumulate_chain needs at least two frames");
    }
    for (const Frame& f : chain) {
        if (!f.same_size(chain.front())) {
            throw GeometryError("accumulate_chain: frames differ in size");
        }
    }
    // chain[0] is the current frame, chain.back() the far reference. Start from the pair
    // adjacent to the reference and fold local flows toward the current frame.
    const std::size_t last = chain.size() - 1;
    const Frame& reference = chain[last];
    FlowField acc = estimate(chain[last - 1], reference, cfg.estimator);
    for (std::size_t k = last - 1; k-- > 0;) {
        const FlowField local = estimate(chain[k], chain[k + 1], cfg.estimator);
        acc = compose_flows(acc, local);
        if (refine_steps) {
            acc = refine(acc, chain[k], reference, cfg.estimator);
        }
    }
    return acc;
}

} // namespace detail

// Long-range flow from chain.front() to chain.back() by recursive composition of
// adjacent-frame flows, refined after each composition when cfg.refine_each_step is set.
inline FlowField accumulate_chain(std::span<const Frame> chain, const AmeConfig& cfg = {})
{
    cfg.validate();
    return detail::accumulate(chain, cfg, cfg.refine_each_step);
}

// Mean MIF at or above the threshold means accumulation.
inline AmeMode gate_mode(double mean_mif, double threshold)
{
    return mean_mif < threshold ? AmeMode::Direct : AmeMode::Accumulated;
}

// Chooses between direct two-frame estimation and chain accumulation for the flows from
// the current frame to both references. chain_fwd runs x_t, x_{t-1}, ..., x_{t-i};
// chain_bwd runs x_t, x_{t+1}, ..., x_{t+j}.
inline AmeResult adaptive_estimate(const Frame& current, std::span<const Frame> chain_fwd,
                                   std::span<const Frame> chain_bwd, const AmeConfig& cfg = {})
{
    cfg.validate();
    if (chain_fwd.size() < 2 || chain_bwd.size() < 2) {
        throw ParameterError("adaptive_estimate: each chain needs the current frame and a reference");
    }
    if (!(chain_fwd.front() == current) || !(chain_bwd.front() == current)) {
        throw ParameterError("adaptive_estimate: chains must start at the current frame");
    }

    AmeResult r;
    const bool adjacent = chain_fwd.size() == 2 && chain_bwd.size() == 2;
    const auto direct = [&] {
        r.flow_fwd = estimate(current, chain_fwd.back(), cfg.estimator);
        r.flow_bwd = estimate(current, chain_bwd.back(), cfg.estimator);
        r.mode = AmeMode::Direct;
    };
    if (adjacent || cfg.policy == AmePolicy::DirectOnly) {
        // A two-frame chain accumulates to exactly the direct estimate.
        direct();
        r.mif_fwd = mif(r.flow_fwd);
        r.mif_bwd = mif(r.flow_bwd);
        return r;
    }

    const FlowField raw_fwd = detail::accumulate(chain_fwd, cfg, false);
    const FlowField raw_bwd = detail::accumulate(chain_bwd, cfg, false);
    r.mif_fwd = mif(raw_fwd);
    r.mif_bwd = mif(raw_bwd);

    if (cfg.policy == AmePolicy::Adaptive && gate_mode(r.mean_mif(), cfg.mif_threshold) == AmeMode::Direct) {
        direct();
        return r;
    }
    r.mode = AmeMode::Accumulated;
    if (cfg.refine_each_step) {
        r.flow_fwd = detail::accumulate(chain_fwd, cfg, true);
        r.flow_bwd = detail::accumulate(chain_bwd, cfg, true);
    } else {
        r.flow_fwd = raw_fwd;
        r.flow_bwd = raw_bwd;
    }
    return r;
}

} // namespace lbvc
