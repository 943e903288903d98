#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "amp.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "range_coder.hpp"

namespace lbvc {

// Fixed 15-byte side-info header, all multi-byte fields big-endian:
//   0-1  magic 0x4C42 ("LB")
//   2    version (1)
//   3    flags, bit0 = use_prediction
//   4    AMP downsample factor S
//   5-6  width
//   7-8  height
//   9-10 quantisation step in 1/256 px
//   11-14 payload length in bytes
inline constexpr std::size_t kHeaderSize = 15;
inline constexpr std::uint8_t kStreamVersion = 1;

struct QuantParams
{
    double step = 0.25;

    // Step as stored in the header; both encoder and decoder quantise with this value.
    std::uint16_t fixed_point() const
    {
        const double v = std::round(step * 256.0);
        if (!(step > 0.0) || v < 1.0 || v > 65535.0) {
            throw ParameterError("quantisation step must be representable in 1/256 px units (1/256 .. 255.99)");
        }
        return static_cast<std::uint16_t>(v);
    }

    double effective_step() const { return fixed_point() / 256.0; }
};

struct SideInfo
{
    bool use_prediction = false;
    int s = 1;
    int width = 0;
    int height = 0;
    std::uint16_t step_fixed = 0;
    std::uint32_t payload_length = 0;
};

struct MotionBitstream
{
    std::vector<std::uint8_t> header;
    std::vector<std::uint8_t> payload;

    std::uint64_t total_bits() const { return 8u * (header.size() + payload.size()); }

    std::vector<std::uint8_t> bytes() const
    {
        std::vector<std::uint8_t> out = header;
        out.insert(out.end(), payload.begin(), payload.end());
        return out;
    }

    // Splits a serialised stream; the declared payload length must match what follows the header.
    static MotionBitstream from_bytes(std::span<const std::uint8_t> data)
    {
        if (data.size() < kHeaderSize) {
            throw DecodeError("motion stream shorter than its header");
        }
        MotionBitstream bs;
        bs.header.assign(data.begin(), data.begin() + kHeaderSize);
        bs.payload.assign(data.begin() + kHeaderSize, data.end());
        return bs;
    }
};

inline std::uint64_t measure_bits(const MotionBitstream& bs)
{
    return bs.total_bits();
}

inline std::vector<std::uint8_t> write_header(const SideInfo& si)
{
    if (si.width < 1 || si.width > 65535 || si.height < 1 || si.height > 65535) {
        throw ParameterError("motion stream dimensions must fit 16 bits");
    }
    if (si.s < 1 || si.s > 255) {
        throw ParameterError("downsample factor must fit one byte");
    }
    std::vector<std::uint8_t> h(kHeaderSize);
    h[0] = 0x4C;
    h[1] = 0x42;
    h[2] = kStreamVersion;
    h[3] = si.use_prediction ? 1 : 0;
    h[4] = static_cast<std::uint8_t>(si.s);
    h[5] = static_cast<std::uint8_t>(si.width >> 8);
    h[6] = static_cast<std::uint8_t>(si.width);
    h[7] = static_cast<std::uint8_t>(si.height >> 8);
    h[8] = static_cast<std::uint8_t>(si.height);
    h[9] = static_cast<std::uint8_t>(si.step_fixed >> 8);
    h[10] = static_cast<std::uint8_t>(si.step_fixed);
    for (int k = 0; k < 4; ++k) {
        h[11 + k] = static_cast<std::uint8_t>(si.payload_length >> (24 - 8 * k));
    }
    return h;
}

inline SideInfo parse_header(std::span<const std::uint8_t> h)
{
    if (h.size() != kHeaderSize) {
        throw FormatError("motion stream header must be 15 bytes");
    }
    if (h[0] != 0x4C || h[1] != 0x42) {
        throw FormatError("motion stream magic mismatch");
    }
    if (h[2] != kStreamVersion) {
        throw FormatError("unsupported motion stream version " + std::to_string(h[2]));
    }
    if ((h[3] & ~1u) != 0) {
        throw FormatError("reserved motion stream flag bits set");
    }
    SideInfo si;
    si.use_prediction = (h[3] & 1u) != 0;
    si.s = h[4];
    si.width = (h[5] << 8) | h[6];
    si.height = (h[7] << 8) | h[8];
    si.step_fixed = static_cast<std::uint16_t>((h[9] << 8) | h[10]);
    for (int k = 0; k < 4; ++k) {
        si.payload_length = (si.payload_length << 8) | h[11 + k];
    }
    if (si.s < 1 || si.width < 1 || si.height < 1 || si.step_fixed == 0) {
        throw FormatError("motion stream header has zero-valued fields");
    }
    return si;
}

namespace detail {

// Shared context pool for the four residual planes. Runs and magnitudes use an
// Exp-Golomb binarisation: adaptive unary prefix, equiprobable suffix.
struct ResidualContexts
{
    static constexpr int kPrefixContexts = 24;
    static constexpr int kMaxPrefix = 31;
    std::array<BitModel, kPrefixContexts> run_prefix{};
    std::array<BitModel, kPrefixContexts> mag_prefix{};
    BitModel sign{};
};

inline void encode_exp_golomb(RangeEncoder& rc, std::array<BitModel, ResidualContexts::kPrefixContexts>& prefix,
                              std::uint32_t value)
{
    const std::uint64_t v = static_cast<std::uint64_t>(value) + 1;
    int k = 0;
    while ((v >> (k + 1)) != 0) {
        ++k;
    }
    for (int i = 0; i < k; ++i) {
        rc.encode(prefix[static_cast<std::size_t>(std::min(i, ResidualContexts::kPrefixContexts - 1))], 1);
    }
    rc.encode(prefix[static_cast<std::size_t>(std::min(k, ResidualContexts::kPrefixContexts - 1))], 0);
    for (int i = k - 1; i >= 0; --i) {
        rc.encode_direct(static_cast<int>((v >> i) & 1u));
    }
}

inline std::uint32_t decode_exp_golomb(RangeDecoder& rc,
                                       std::array<BitModel, ResidualContexts::kPrefixContexts>& prefix)
{
    int k = 0;
    while (rc.decode(prefix[static_cast<std::size_t>(std::min(k, ResidualContexts::kPrefixContexts - 1))]) == 1) {
        if (++k > ResidualContexts::kMaxPrefix) {
            throw DecodeError("Exp-Golomb prefix too long");
        }
    }
    std::uint64_t v = 1;
    for (int i = 0; i < k; ++i) {
        v = (v << 1) | static_cast<std::uint64_t>(rc.decode_direct());
    }
    return static_cast<std::uint32_t>(v - 1);
}

// Plane syntax: repeated (zero-run, sign, |q| - 1); a run reaching the plane end closes it.
inline void encode_plane(RangeEncoder& rc, ResidualContexts& ctx, std::span<const std::int32_t> q)
{
    std::size_t pos = 0;
    while (pos < q.size()) {
        std::size_t run = 0;
        while (pos + run < q.size() && q[pos + run] == 0) {
            ++run;
        }
        encode_exp_golomb(rc, ctx.run_prefix, static_cast<std::uint32_t>(run));
        pos += run;
        if (pos == q.size()) {
            break;
        }
        const std::int32_t v = q[pos];
        rc.encode(ctx.sign, v < 0 ? 1 : 0);
        encode_exp_golomb(rc, ctx.mag_prefix, static_cast<std::uint32_t>(std::abs(static_cast<std::int64_t>(v)) - 1));
        ++pos;
    }
}

inline void decode_plane(RangeDecoder& rc, ResidualContexts& ctx, std::span<std::int32_t> q)
{
    std::size_t pos = 0;
    while (pos < q.size()) {
        const std::uint32_t run = decode_exp_golomb(rc, ctx.run_prefix);
        if (run > q.size() - pos) {
            throw DecodeError("zero run overflows residual plane");
        }
        for (std::uint32_t i = 0; i < run; ++i) {
            q[pos++] = 0;
        }
        if (pos == q.size()) {
            break;
        }
        const int negative = rc.decode(ctx.sign);
        const std::uint32_t mag = decode_exp_golomb(rc, ctx.mag_prefix);
        if (mag >= static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max())) {
            throw DecodeError("residual magnitude out of range");
        }
        const auto value = static_cast<std::int32_t>(mag + 1);
        q[pos++] = negative ? -value : value;
    }
}

inline std::vector<std::int32_t> quantise(std::span<const float> estimated, std::span<const float> predicted,
                                          double step)
{
    std::vector<std::int32_t> q(estimated.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double r = (static_cast<double>(estimated[i]) - predicted[i]) / step;
        if (!std::isfinite(r) || std::abs(r) > 1e9) {
            throw ParameterError("motion residual not finite or too large to quantise");
        }
        q[i] = static_cast<std::int32_t>(std::llround(r));
    }
    return q;
}

inline void reconstruct(std::span<const std::int32_t> q, std::span<const float> predicted, double step,
                        std::span<float> out)
{
    for (std::size_t i = 0; i < q.size(); ++i) {
        out[i] = static_cast<float>(static_cast<double>(predicted[i]) + step * q[i]);
    }
}

} // namespace detail

struct EncodedMotion
{
    MotionBitstream bitstream;
    FlowField v_hat_fwd;
    FlowField v_hat_bwd;
};

struct DecodedMotion
{
    FlowField v_hat_fwd;
    FlowField v_hat_bwd;
    SideInfo side_info;
};

// Codes the residuals between the estimated flows and the decision's predicted flows
// (zero when the decision disables prediction) with one shared adaptive model.
inline EncodedMotion encode_motion(const FlowField& v_e_fwd, const FlowField& v_e_bwd, const MotionDecision& decision,
                                   const QuantParams& q = {})
{
    detail::require_same(v_e_fwd, v_e_bwd, "encode_motion");
    const int w = v_e_fwd.width();
    const int h = v_e_fwd.height();
    const FlowField zero(w, h);
    const FlowField& pred_fwd = decision.use_prediction ? decision.flow_pred_fwd : zero;
    const FlowField& pred_bwd = decision.use_prediction ? decision.flow_pred_bwd : zero;
    detail::require_same(v_e_fwd, pred_fwd, "encode_motion");
    detail::require_same(v_e_fwd, pred_bwd, "encode_motion");

    const std::uint16_t step_fixed = q.fixed_point();
    const double step = step_fixed / 256.0;
    const std::array<std::span<const float>, 4> est{v_e_fwd.dx(), v_e_fwd.dy(), v_e_bwd.dx(), v_e_bwd.dy()};
    const std::array<std::span<const float>, 4> pred{pred_fwd.dx(), pred_fwd.dy(), pred_bwd.dx(), pred_bwd.dy()};

    EncodedMotion out;
    out.v_hat_fwd = FlowField(w, h);
    out.v_hat_bwd = FlowField(w, h);
    const std::array<std::span<float>, 4> rec{out.v_hat_fwd.dx(), out.v_hat_fwd.dy(), out.v_hat_bwd.dx(),
                                              out.v_hat_bwd.dy()};

    RangeEncoder rc;
    detail::ResidualContexts ctx;
    for (std::size_t p = 0; p < 4; ++p) {
        const std::vector<std::int32_t> qv = detail::quantise(est[p], pred[p], step);
        detail::encode_plane(rc, ctx, qv);
        detail::reconstruct(qv, pred[p], step, rec[p]);
    }
    out.bitstream.payload = rc.finish();

    SideInfo si;
    si.use_prediction = decision.use_prediction;
    si.s = decision.s_opt;
    si.width = w;
    si.height = h;
    si.step_fixed = step_fixed;
    si.payload_length = static_cast<std::uint32_t>(out.bitstream.payload.size());
    out.bitstream.header = write_header(si);
    return out;
}

// Inverse of encode_motion. The predicted flows are only consulted when the stream's
// flag says prediction was used; otherwise they may be empty.
inline DecodedMotion decode_motion(const MotionBitstream& bs, const FlowField& v_pred_fwd, const FlowField& v_pred_bwd,
                                   const QuantParams& q = {})
{
    DecodedMotion out;
    out.side_info = parse_header(bs.header);
    const SideInfo& si = out.side_info;
    if (si.step_fixed != q.fixed_point()) {
        throw ParameterError("motion stream quantisation step differs from the decoder's");
    }
    if (si.payload_length != bs.payload.size()) {
        throw DecodeError("motion payload length " + std::to_string(bs.payload.size()) + " differs from header value " +
                          std::to_string(si.payload_length));
    }
    const FlowField zero(si.width, si.height);
    const FlowField& pred_fwd = si.use_prediction ? v_pred_fwd : zero;
    const FlowField& pred_bwd = si.use_prediction ? v_pred_bwd : zero;
    if (pred_fwd.width() != si.width || pred_fwd.height() != si.height || !pred_fwd.same_size(pred_bwd)) {
        throw GeometryError("predicted flows do not match the stream dimensions");
    }

    const double step = si.step_fixed / 256.0;
    out.v_hat_fwd = FlowField(si.width, si.height);
    out.v_hat_bwd = FlowField(si.width, si.height);
    const std::array<std::span<const float>, 4> pred{pred_fwd.dx(), pred_fwd.dy(), pred_bwd.dx(), pred_bwd.dy()};
    const std::array<std::span<float>, 4> rec{out.v_hat_fwd.dx(), out.v_hat_fwd.dy(), out.v_hat_bwd.dx(),
                                              out.v_hat_bwd.dy()};

    RangeDecoder rc(bs.payload);
    detail::ResidualContexts ctx;
    std::vector<std::int32_t> qv(static_cast<std::size_t>(si.width) * static_cast<std::size_t>(si.height));
    for (std::size_t p = 0; p < 4; ++p) {
        detail::decode_plane(rc, ctx, qv);
        detail::reconstruct(qv, pred[p], step, rec[p]);
    }
    rc.finish();
    return out;
}

// Decoder-side path: the predicted flows are re-derived from the decoded references and
// the signalled factor, exactly as the encoder formed them.
inline DecodedMotion decode_motion_from_references(const MotionBitstream& bs, const Frame& ref_fwd,
                                                   const Frame& ref_bwd, double tau, const EstimatorParams& est = {},
                                                   const QuantParams& q = {},
                                                   const FlowBackend& backend = default_backend())
{
    const SideInfo si = parse_header(bs.header);
    if (!si.use_prediction) {
        return decode_motion(bs, FlowField{}, FlowField{}, q);
    }
    const PredictedFlows p = predict_flows(ref_fwd, ref_bwd, tau, si.s, est, backend);
    return decode_motion(bs, p.fwd, p.bwd, q);
}

} // namespace lbvc
