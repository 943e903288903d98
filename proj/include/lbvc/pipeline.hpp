#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ame.hpp"
#include "amp.hpp"
#include "errors.hpp"
#include "frame.hpp"
#include "gop.hpp"
#include "metrics.hpp"
#include "motion_codec.hpp"

namespace lbvc {

struct FrameRecord
{
    int display_index = 0;
    int coding_order = 0;
    int temporal_level = 0;
    double distortion_weight = 0.0;
    int ref_fwd = 0;
    int ref_bwd = 0;
    double tau = 0.5;
    AmeMode mode = AmeMode::Direct;
    double mif_fwd = 0.0;
    double mif_bwd = 0.0;
    int s_opt = 1;
    bool use_prediction = false;
    std::map<int, double> psnr_by_factor;
    std::optional<double> amp_psnr; // PSNR of the selected motion prediction, absent when AMP is off
    double prediction_psnr = 0.0;   // PSNR of the motion-compensated prediction from decoded flows
    std::uint64_t motion_bits = 0;
    std::vector<std::uint8_t> stream; // serialised motion bitstream
};

struct SequenceReport
{
    int width = 0;
    int height = 0;
    int num_frames = 0;
    int gop_size = 0;
    int intra_period = 0;
    std::vector<FrameRecord> records; // B frames, display order

    double mean_prediction_psnr() const
    {
        if (records.empty()) {
            return 0.0;
        }
        double s = 0.0;
        for (const FrameRecord& r : records) {
            s += r.prediction_psnr;
        }
        return s / static_cast<double>(records.size());
    }

    double mean_amp_psnr() const
    {
        double s = 0.0;
        int n = 0;
        for (const FrameRecord& r : records) {
            if (r.amp_psnr) {
                s += *r.amp_psnr;
                ++n;
            }
        }
        return n == 0 ? 0.0 : s / n;
    }

    std::uint64_t total_motion_bits() const
    {
        std::uint64_t bits = 0;
        for (const FrameRecord& r : records) {
            bits += r.motion_bits;
        }
        return bits;
    }

    double bits_per_pixel() const
    {
        if (records.empty()) {
            return 0.0;
        }
        return static_cast<double>(total_motion_bits()) /
               (static_cast<double>(width) * height * static_cast<double>(records.size()));
    }

    std::map<std::string, int> mode_histogram() const
    {
        std::map<std::string, int> h{{"direct", 0}, {"accumulated", 0}};
        for (const FrameRecord& r : records) {
            ++h[std::string(to_string(r.mode))];
        }
        return h;
    }
};

// Motion path of the codec over one sequence. Intra frames pass through uncoded, so the
// "decoded" references handed to AMP are the original frames.
inline SequenceReport run_pipeline(const VideoSequence& seq, const Schedule& schedule, const AmeConfig& ame_cfg = {},
                                   const AmpConfig& amp_cfg = {}, const QuantParams& quant = {})
{
    seq.validate();
    ame_cfg.validate();
    amp_cfg.validate();
    if (schedule.units.size() != seq.size()) {
        throw ParameterError("schedule covers " + std::to_string(schedule.units.size()) + " frames but the sequence has " +
                             std::to_string(seq.size()));
    }

    SequenceReport report;
    report.width = seq.width();
    report.height = seq.height();
    report.num_frames = static_cast<int>(seq.size());
    report.gop_size = schedule.gop_size;
    report.intra_period = schedule.intra_period;

    std::map<int, FrameRecord> by_display;
    for (const CodingUnit* u : schedule.in_coding_order()) {
        if (u->type != FrameType::B) {
            continue;
        }
        const int t = u->display_index;
        const int f = *u->ref_fwd;
        const int b = *u->ref_bwd;
        const Frame& current = seq[static_cast<std::size_t>(t)];
        const Frame& ref_fwd = seq[static_cast<std::size_t>(f)];
        const Frame& ref_bwd = seq[static_cast<std::size_t>(b)];

        std::vector<Frame> chain_fwd;
        for (int k = t; k >= f; --k) {
            chain_fwd.push_back(seq[static_cast<std::size_t>(k)]);
        }
        std::vector<Frame> chain_bwd;
        for (int k = t; k <= b; ++k) {
            chain_bwd.push_back(seq[static_cast<std::size_t>(k)]);
        }
        const AmeResult ame = adaptive_estimate(current, chain_fwd, chain_bwd, ame_cfg);

        const double tau = static_cast<double>(t - f) / static_cast<double>(b - f);
        const MotionDecision decision = select(current, ref_fwd, ref_bwd, tau, amp_cfg, ame_cfg.estimator);
        const EncodedMotion enc = encode_motion(ame.flow_fwd, ame.flow_bwd, decision, quant);

        const DecodedMotion dec =
            decode_motion_from_references(enc.bitstream, ref_fwd, ref_bwd, tau, ame_cfg.estimator, quant);
        if (!(dec.v_hat_fwd == enc.v_hat_fwd) || !(dec.v_hat_bwd == enc.v_hat_bwd)) {
            throw std::logic_error("decoder reconstruction diverged from encoder at frame " + std::to_string(t));
        }

        const Frame prediction =
            average_frames(warp_image(ref_fwd, dec.v_hat_fwd), warp_image(ref_bwd, dec.v_hat_bwd));

        FrameRecord r;
        r.display_index = t;
        r.coding_order = u->coding_order;
        r.temporal_level = u->temporal_level;
        r.distortion_weight = u->distortion_weight;
        r.ref_fwd = f;
        r.ref_bwd = b;
        r.tau = tau;
        r.mode = ame.mode;
        r.mif_fwd = ame.mif_fwd;
        r.mif_bwd = ame.mif_bwd;
        r.s_opt = decision.s_opt;
        r.use_prediction = decision.use_prediction;
        r.psnr_by_factor = decision.psnr_by_factor;
        if (amp_cfg.enabled) {
            r.amp_psnr = decision.selected_psnr();
        }
        r.prediction_psnr = psnr(current, prediction);
        r.motion_bits = measure_bits(enc.bitstream);
        r.stream = enc.bitstream.bytes();
        by_display.emplace(t, std::move(r));
    }
    for (auto& [t, r] : by_display) {
        report.records.push_back(std::move(r));
    }
    return report;
}

// One configuration of an ablation: a motion-estimation policy crossed with a
// motion-prediction policy, written "<me>+<mp>".
//   me: direct-only | accumulate-no-refine | accumulate-refine | ame
//   mp: no-mp | amp | s<f1>-<f2>-... (fixed factor set, prediction always used)
struct AblationArm
{
    std::string name;
    AmeConfig ame;
    AmpConfig amp;
};

inline AblationArm parse_arm(const std::string& arm_name, const AmeConfig& base_ame = {}, const AmpConfig& base_amp = {})
{
    AblationArm arm;
    arm.name = arm_name;
    arm.ame = base_ame;
    arm.amp = base_amp;
    std::string me = "ame";
    std::string mp = "amp";
    const auto plus = arm_name.find('+');
    if (plus != std::string::npos) {
        me = arm_name.substr(0, plus);
        mp = arm_name.substr(plus + 1);
    } else if (arm_name == "no-mp" || arm_name == "amp" || (arm_name.size() > 1 && arm_name[0] == 's')) {
        mp = arm_name;
    } else {
        me = arm_name;
    }

    if (me == "direct-only") {
        arm.ame.policy = AmePolicy::DirectOnly;
    } else if (me == "accumulate-no-refine") {
        arm.ame.policy = AmePolicy::AccumulateOnly;
        arm.ame.refine_each_step = false;
    } else if (me == "accumulate-refine") {
        arm.ame.policy = AmePolicy::AccumulateOnly;
        arm.ame.refine_each_step = true;
    } else if (me == "ame") {
        arm.ame.policy = AmePolicy::Adaptive;
        arm.ame.refine_each_step = true;
    } else {
        throw ParameterError("unknown motion-estimation arm '" + me + "'");
    }

    if (mp == "no-mp") {
        arm.amp.enabled = false;
    } else if (mp == "amp") {
        arm.amp.enabled = true;
        arm.amp.gate = true;
    } else if (mp.size() > 1 && mp[0] == 's') {
        arm.amp.enabled = true;
        arm.amp.gate = false;
        arm.amp.factors.clear();
        std::stringstream ss(mp.substr(1));
        std::string item;
        while (std::getline(ss, item, '-')) {
            try {
                arm.amp.factors.push_back(std::stoi(item));
            } catch (const std::logic_error&) {
                throw ParameterError("bad factor '" + item + "' in arm '" + arm_name + "'");
            }
        }
        arm.amp.validate();
    } else {
        throw ParameterError("unknown motion-prediction arm '" + mp + "'");
    }
    return arm;
}

struct ArmResult
{
    std::string name;
    SequenceReport report;
    double mean_prediction_psnr = 0.0;
    double mean_amp_psnr = 0.0;
    std::uint64_t motion_bits = 0;
    double delta_psnr_db = 0.0;   // vs anchor
    double delta_bits_pct = 0.0;  // vs anchor
};

struct AblationTable
{
    std::string anchor;
    std::vector<ArmResult> arms;

    const ArmResult& arm(const std::string& name) const
    {
        for (const ArmResult& a : arms) {
            if (a.name == name) {
                return a;
            }
        }
        throw ParameterError("no arm named '" + name + "'");
    }
};

// Runs the pipeline once per arm; deltas are taken against `anchor` (the first arm when empty).
inline AblationTable ablation(const VideoSequence& seq, const Schedule& schedule, const std::vector<std::string>& arms,
                              const std::string& anchor = {}, const AmeConfig& base_ame = {},
                              const AmpConfig& base_amp = {}, const QuantParams& quant = {})
{
    if (arms.empty()) {
        throw ParameterError("ablation needs at least one arm");
    }
    AblationTable table;
    table.anchor = anchor.empty() ? arms.front() : anchor;
    for (const std::string& arm_name : arms) {
        const AblationArm arm = parse_arm(arm_name, base_ame, base_amp);
        ArmResult r;
        r.name = arm.name;
        r.report = run_pipeline(seq, schedule, arm.ame, arm.amp, quant);
        r.mean_prediction_psnr = r.report.mean_prediction_psnr();
        r.mean_amp_psnr = r.report.mean_amp_psnr();
        r.motion_bits = r.report.total_motion_bits();
        table.arms.push_back(std::move(r));
    }
    const ArmResult& a = table.arm(table.anchor);
    const double anchor_psnr = a.mean_prediction_psnr;
    const double anchor_bits = static_cast<double>(a.motion_bits);
    for (ArmResult& r : table.arms) {
        r.delta_psnr_db = r.mean_prediction_psnr - anchor_psnr;
        r.delta_bits_pct = anchor_bits > 0 ? 100.0 * (static_cast<double>(r.motion_bits) - anchor_bits) / anchor_bits : 0.0;
    }
    return table;
}

} // namespace lbvc
