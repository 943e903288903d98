#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "flow_estimator.hpp"
#include "frame.hpp"
#include "metrics.hpp"

namespace lbvc {

struct AmpConfig
{
    std::vector<int> factors{1, 2, 3, 4};
    double psnr_threshold = 20.0;
    // When false the prediction is always used, whatever its PSNR (plain factor-set arms).
    bool gate = true;
    // When false no prediction is formed at all and flows are coded as-is.
    bool enabled = true;

    void validate() const
    {
        if (factors.empty()) {
            throw ParameterError("AMP factor set is empty");
        }
        for (std::size_t k = 0; k < factors.size(); ++k) {
            if (factors[k] < 1 || (k > 0 && factors[k] <= factors[k - 1])) {
                throw ParameterError("AMP factors must be >= 1 and strictly increasing");
            }
        }
        if (!(psnr_threshold > 0.0)) {
            throw ParameterError("AMP PSNR threshold must be positive");
        }
    }
};

struct PredictedFlows
{
    FlowField fwd; // current -> past reference
    FlowField bwd; // current -> future reference
};

struct FactorEvaluation
{
    double psnr = 0.0;
    PredictedFlows flows;
};

struct MotionDecision
{
    int s_opt = 1;
    bool use_prediction = false;
    std::map<int, double> psnr_by_factor;
    FlowField flow_pred_fwd;
    FlowField flow_pred_bwd;

    double selected_psnr() const { return psnr_by_factor.at(s_opt); }
};

// Linear-motion flow prediction from the two references alone. The cross-reference flow
// g (future -> past) is estimated on references decimated by `factor`; the current frame
// at relative time tau sees the past reference at tau * g and the future one at -(1 - tau) * g.
inline PredictedFlows predict_flows(const Frame& ref_fwd, const Frame& ref_bwd, double tau, int factor,
                                    const EstimatorParams& est = {}, const FlowBackend& backend = default_backend())
{
    if (!ref_fwd.same_size(ref_bwd)) {
        throw GeometryError("predict_flows: references differ in size");
    }
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ParameterError("predict_flows: tau must lie strictly inside (0, 1)");
    }
    const Frame small_fwd = downsample_frame(ref_fwd, factor);
    const Frame small_bwd = downsample_frame(ref_bwd, factor);
    const FlowField cross = backend.estimate(small_bwd, small_fwd, est);
    const int w = ref_fwd.width();
    const int h = ref_fwd.height();
    return {resample_flow(scale_flow(cross, tau), w, h), resample_flow(scale_flow(cross, -(1.0 - tau)), w, h)};
}

// Quality of the factor-S prediction: PSNR of the mean of both references warped by the
// predicted flows against the current frame.
inline FactorEvaluation evaluate_factor(const Frame& current, const Frame& ref_fwd, const Frame& ref_bwd, double tau,
                                        int factor, const EstimatorParams& est = {},
                                        const FlowBackend& backend = default_backend())
{
    if (!current.same_size(ref_fwd) || !current.same_size(ref_bwd)) {
        throw GeometryError("evaluate_factor: frame dimensions differ");
    }
    FactorEvaluation ev;
    ev.flows = predict_flows(ref_fwd, ref_bwd, tau, factor, est, backend);
    const Frame blended = average_frames(warp_image(ref_fwd, ev.flows.fwd), warp_image(ref_bwd, ev.flows.bwd));
    ev.psnr = psnr(current, blended);
    return ev;
}

// Evaluates every factor, keeps the best (smallest factor on ties) and zeroes the prediction
// when its PSNR falls below the threshold.
inline MotionDecision select(const Frame& current, const Frame& ref_fwd, const Frame& ref_bwd, double tau,
                             const AmpConfig& cfg = {}, const EstimatorParams& est = {},
                             const FlowBackend& backend = default_backend())
{
    cfg.validate();
    MotionDecision d;
    const int w = current.width();
    const int h = current.height();
    if (!cfg.enabled) {
        d.s_opt = cfg.factors.front();
        d.use_prediction = false;
        d.flow_pred_fwd = FlowField(w, h);
        d.flow_pred_bwd = FlowField(w, h);
        return d;
    }

    std::vector<FactorEvaluation> evals;
    evals.reserve(cfg.factors.size());
    for (int s : cfg.factors) {
        evals.push_back(evaluate_factor(current, ref_fwd, ref_bwd, tau, s, est, backend));
        d.psnr_by_factor[s] = evals.back().psnr;
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < evals.size(); ++k) {
        if (evals[k].psnr > evals[best].psnr) {
            best = k;
        }
    }
    d.s_opt = cfg.factors[best];
    d.use_prediction = !cfg.gate || evals[best].psnr >= cfg.psnr_threshold;
    if (d.use_prediction) {
        d.flow_pred_fwd = std::move(evals[best].flows.fwd);
        d.flow_pred_bwd = std::move(evals[best].flows.bwd);
    } else {
        d.flow_pred_fwd = FlowField(w, h);
        d.flow_pred_bwd = FlowField(w, h);
    }
    return d;
}

} // namespace lbvc
