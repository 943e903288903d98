#include <gtest/gtest.h>

#include "common.hpp"

using namespace lbvc;

namespace {

MotionDecision no_prediction(int w, int h)
{
    MotionDecision d;
    d.use_prediction = false;
    d.flow_pred_fwd = FlowField(w, h);
    d.flow_pred_bwd = FlowField(w, h);
    return d;
}

MotionDecision with_prediction(FlowField fwd, FlowField bwd, int s = 2)
{
    MotionDecision d;
    d.use_prediction = true;
    d.s_opt = s;
    d.flow_pred_fwd = std::move(fwd);
    d.flow_pred_bwd = std::move(bwd);
    return d;
}

double max_component_error(const FlowField& a, const FlowField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.dx()[i]) - b.dx()[i]));
        m = std::max(m, std::abs(static_cast<double>(a.dy()[i]) - b.dy()[i]));
    }
    return m;
}

// Float storage of the reconstruction adds at most one rounding on values below 64 px.
constexpr double kFloatSlack = 1e-5;

} // namespace

TEST(RangeCoder, SkewedBitsRoundTrip)
{
    std::mt19937 rng(3);
    std::bernoulli_distribution skew(0.1);
    std::bernoulli_distribution fair(0.5);
    std::vector<int> bits(5000);
    std::vector<int> direct(5000);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = skew(rng) ? 1 : 0;
        direct[i] = fair(rng) ? 1 : 0;
    }
    RangeEncoder enc;
    BitModel m;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        enc.encode(m, bits[i]);
        enc.encode_direct(direct[i]);
    }
    const auto bytes = enc.finish();
    RangeDecoder dec(bytes);
    BitModel md;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        ASSERT_EQ(dec.decode(md), bits[i]) << i;
        ASSERT_EQ(dec.decode_direct(), direct[i]) << i;
    }
    EXPECT_NO_THROW(dec.finish());
}

TEST(RangeCoder, AdaptationCompresses)
{
    RangeEncoder enc;
    BitModel m;
    for (int i = 0; i < 8000; ++i) {
        enc.encode(m, 0);
    }
    EXPECT_LT(enc.finish().size(), 40u);
}

TEST(RangeCoder, EmptyStream)
{
    RangeEncoder enc;
    const auto bytes = enc.finish();
    EXPECT_EQ(bytes.size(), 5u);
    RangeDecoder dec(bytes);
    EXPECT_NO_THROW(dec.finish());
}

TEST(RangeCoder, RejectsShortAndBadLeadingByte)
{
    const std::vector<std::uint8_t> short_stream{0, 0, 0};
    EXPECT_THROW(RangeDecoder{short_stream}, DecodeError);
    const std::vector<std::uint8_t> bad_lead{7, 0, 0, 0, 0};
    EXPECT_THROW(RangeDecoder{bad_lead}, DecodeError);
}

TEST(Header, ByteLayout)
{
    SideInfo si;
    si.use_prediction = true;
    si.s = 3;
    si.width = 0x0140;
    si.height = 0x00F0;
    si.step_fixed = 64;
    si.payload_length = 0x01020304;
    const auto h = write_header(si);
    const std::vector<std::uint8_t> expect{0x4C, 0x42, 1, 1, 3, 0x01, 0x40, 0x00, 0xF0, 0x00, 64, 1, 2, 3, 4};
    EXPECT_EQ(h, expect);
    const SideInfo back = parse_header(h);
    EXPECT_TRUE(back.use_prediction);
    EXPECT_EQ(back.s, 3);
    EXPECT_EQ(back.width, 320);
    EXPECT_EQ(back.height, 240);
    EXPECT_EQ(back.step_fixed, 64);
    EXPECT_EQ(back.payload_length, 0x01020304u);
}

TEST(Header, Rejections)
{
    SideInfo si;
    si.width = 4;
    si.height = 4;
    si.step_fixed = 64;
    auto h = write_header(si);
    auto bad = h;
    bad[0] = 'X';
    EXPECT_THROW(parse_header(bad), FormatError);
    bad = h;
    bad[2] = 2;
    EXPECT_THROW(parse_header(bad), FormatError);
    bad = h;
    bad[3] = 0x80;
    EXPECT_THROW(parse_header(bad), FormatError);
    EXPECT_THROW(parse_header(std::span(h).first(10)), FormatError);
    si.width = 70000;
    EXPECT_THROW(write_header(si), ParameterError);
}

TEST(QuantParams, FixedPoint)
{
    EXPECT_EQ(QuantParams{0.25}.fixed_point(), 64);
    EXPECT_EQ(QuantParams{1.0}.fixed_point(), 256);
    EXPECT_DOUBLE_EQ(QuantParams{0.3}.effective_step(), 77.0 / 256.0);
    EXPECT_THROW(QuantParams{0.0}.fixed_point(), ParameterError);
    EXPECT_THROW(QuantParams{-1.0}.fixed_point(), ParameterError);
    EXPECT_THROW(QuantParams{1e-4}.fixed_point(), ParameterError);
}

TEST(MeasureBits, IsEightTimesBytes)
{
    MotionBitstream bs;
    bs.header = {1, 2, 3, 4};
    EXPECT_EQ(measure_bits(bs), 32u);
    bs.payload = {9, 9, 9};
    EXPECT_EQ(measure_bits(bs), 56u);
}

TEST(Codec, RandomRoundTrip)
{
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> dim(1, 24);
    std::uniform_int_distribution<int> step_idx(0, 3);
    std::bernoulli_distribution coin(0.5);
    const double steps[] = {0.25, 0.5, 1.0 / 64.0, 1.3};
    for (int trial = 0; trial < 200; ++trial) {
        const int w = dim(rng);
        const int h = dim(rng);
        const auto seed = static_cast<std::uint32_t>(trial);
        const FlowField ef = testutil::random_flow(w, h, -20, 20, seed * 4 + 0);
        const FlowField eb = testutil::random_flow(w, h, -20, 20, seed * 4 + 1);
        const MotionDecision d = coin(rng) ? with_prediction(testutil::random_flow(w, h, -20, 20, seed * 4 + 2),
                                                             testutil::random_flow(w, h, -20, 20, seed * 4 + 3), 3)
                                           : no_prediction(w, h);
        const QuantParams q{steps[step_idx(rng)]};
        const EncodedMotion enc = encode_motion(ef, eb, d, q);
        const auto stream = enc.bitstream.bytes();
        const DecodedMotion dec = decode_motion(MotionBitstream::from_bytes(stream), d.flow_pred_fwd, d.flow_pred_bwd, q);
        ASSERT_EQ(dec.v_hat_fwd, enc.v_hat_fwd) << "trial " << trial;
        ASSERT_EQ(dec.v_hat_bwd, enc.v_hat_bwd) << "trial " << trial;
        EXPECT_EQ(dec.side_info.use_prediction, d.use_prediction);
        EXPECT_EQ(dec.side_info.s, d.use_prediction ? 3 : 1);
        EXPECT_EQ(dec.side_info.width, w);
        EXPECT_EQ(dec.side_info.height, h);
        const double half = q.effective_step() / 2 + kFloatSlack;
        EXPECT_LE(max_component_error(enc.v_hat_fwd, ef), half);
        EXPECT_LE(max_component_error(enc.v_hat_bwd, eb), half);
        EXPECT_EQ(measure_bits(enc.bitstream), 8u * stream.size());
    }
}

TEST(Codec, ZeroResidualIsTiny)
{
    const FlowField p = testutil::random_flow(64, 64, -5, 5, 1);
    const FlowField b = testutil::random_flow(64, 64, -5, 5, 2);
    const EncodedMotion enc = encode_motion(p, b, with_prediction(p, b), {});
    EXPECT_LE(enc.bitstream.payload.size(), 64u);
    EXPECT_EQ(enc.v_hat_fwd, p);
    EXPECT_EQ(enc.v_hat_bwd, b);
}

TEST(Codec, FlagOffCodesTheEstimateItself)
{
    const FlowField ef = testutil::random_flow(16, 16, -3, 3, 4);
    const FlowField eb = testutil::random_flow(16, 16, -3, 3, 5);
    MotionDecision d = with_prediction(FlowField(16, 16, 9.0f, 9.0f), FlowField(16, 16, -9.0f, 1.0f));
    d.use_prediction = false;
    const EncodedMotion a = encode_motion(ef, eb, d, {});
    const EncodedMotion b = encode_motion(ef, eb, no_prediction(16, 16), {});
    EXPECT_EQ(a.bitstream.payload, b.bitstream.payload);
    EXPECT_LE(max_component_error(a.v_hat_fwd, ef), 0.125 + kFloatSlack);
    // Decoding with the flag off ignores whatever prediction is passed.
    const DecodedMotion dec = decode_motion(a.bitstream, FlowField(3, 3, 1.0f, 1.0f), FlowField(), {});
    EXPECT_EQ(dec.v_hat_fwd, a.v_hat_fwd);
}

TEST(Codec, ZeroStreamDecodesToZero)
{
    const EncodedMotion enc = encode_motion(FlowField(8, 8), FlowField(8, 8), no_prediction(8, 8), {});
    const DecodedMotion dec = decode_motion(enc.bitstream, FlowField(), FlowField(), {});
    EXPECT_TRUE(dec.v_hat_fwd.is_zero());
    EXPECT_TRUE(dec.v_hat_bwd.is_zero());
    EXPECT_FALSE(dec.side_info.use_prediction);
}

TEST(Codec, RandomResidualCostsMoreThanZero)
{
    const FlowField zero(32, 32);
    const EncodedMotion z = encode_motion(zero, zero, no_prediction(32, 32), {});
    const EncodedMotion r = encode_motion(testutil::random_flow(32, 32, -2, 2, 8),
                                          testutil::random_flow(32, 32, -2, 2, 9), no_prediction(32, 32), {});
    EXPECT_GT(measure_bits(r.bitstream), measure_bits(z.bitstream));
}

TEST(Codec, CoarserStepCostsNoMore)
{
    const FlowField f = testutil::random_flow(32, 32, -4, 4, 10);
    const FlowField b = testutil::random_flow(32, 32, -4, 4, 11);
    const auto bits = [&](double step) {
        return measure_bits(encode_motion(f, b, no_prediction(32, 32), QuantParams{step}).bitstream);
    };
    EXPECT_LE(bits(1.0), bits(0.25));
    EXPECT_LE(bits(0.25), bits(1.0 / 16));
}

TEST(Codec, RateFollowsResidualEnergy)
{
    double previous = 1e18;
    for (double amp : {8.0, 2.0, 0.5, 0.1}) {
        double total = 0.0;
        for (std::uint32_t seed = 0; seed < 10; ++seed) {
            const FlowField f = testutil::random_flow(24, 24, -amp, amp, 100 + seed);
            total += static_cast<double>(measure_bits(encode_motion(f, f, no_prediction(24, 24), {}).bitstream));
        }
        EXPECT_LT(total, previous) << "amplitude " << amp;
        previous = total;
    }
}

TEST(Codec, TruncationAlwaysFails)
{
    const EncodedMotion enc = encode_motion(testutil::random_flow(16, 16, -3, 3, 1),
                                            testutil::random_flow(16, 16, -3, 3, 2), no_prediction(16, 16), {});
    const auto full = enc.bitstream.bytes();
    for (std::size_t cut = 1; cut < enc.bitstream.payload.size(); ++cut) {
        // Header kept intact: length mismatch.
        std::vector<std::uint8_t> s(full.begin(), full.end() - static_cast<long>(cut));
        EXPECT_THROW(decode_motion(MotionBitstream::from_bytes(s), {}, {}, {}), DecodeError);
        // Header patched to the shorter length: the range decoder runs dry.
        SideInfo si = parse_header(std::span(s).first(kHeaderSize));
        si.payload_length -= static_cast<std::uint32_t>(cut);
        const auto h = write_header(si);
        std::copy(h.begin(), h.end(), s.begin());
        EXPECT_THROW(decode_motion(MotionBitstream::from_bytes(s), {}, {}, {}), DecodeError) << "cut " << cut;
    }
    EXPECT_THROW(MotionBitstream::from_bytes(std::span(full).first(10)), DecodeError);
}

TEST(Codec, CorruptionOnlyRaisesDecodeErrors)
{
    const EncodedMotion enc = encode_motion(testutil::random_flow(16, 16, -3, 3, 3),
                                            testutil::random_flow(16, 16, -3, 3, 4), no_prediction(16, 16), {});
    std::mt19937 rng(5);
    int detected = 0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        MotionBitstream bs = enc.bitstream;
        std::uniform_int_distribution<std::size_t> pos(0, bs.payload.size() - 1);
        std::uniform_int_distribution<int> bit(0, 7);
        bs.payload[pos(rng)] ^= static_cast<std::uint8_t>(1u << bit(rng));
        try {
            const DecodedMotion d = decode_motion(bs, {}, {}, {});
            EXPECT_TRUE(d.v_hat_fwd.all_finite());
        } catch (const DecodeError&) {
            ++detected;
        }
    }
    RecordProperty("corruptions_detected", detected);
    EXPECT_GT(detected, trials * 9 / 10);
}

TEST(Codec, StepMismatchAndGeometry)
{
    const EncodedMotion enc = encode_motion(FlowField(8, 8), FlowField(8, 8), no_prediction(8, 8), QuantParams{0.5});
    EXPECT_THROW(decode_motion(enc.bitstream, {}, {}, QuantParams{0.25}), ParameterError);
    EXPECT_THROW(encode_motion(FlowField(8, 8), FlowField(8, 7), no_prediction(8, 8), {}), GeometryError);
    EXPECT_THROW(encode_motion(FlowField(8, 8), FlowField(8, 8), with_prediction(FlowField(4, 4), FlowField(4, 4)), {}),
                 GeometryError);
    const EncodedMotion p = encode_motion(FlowField(8, 8), FlowField(8, 8),
                                          with_prediction(FlowField(8, 8), FlowField(8, 8)), {});
    EXPECT_THROW(decode_motion(p.bitstream, FlowField(4, 4), FlowField(4, 4), {}), GeometryError);
}

TEST(Codec, PredictionPaysOnLinearPan)
{
    const VideoSequence s = synthetic::pan_sequence(64, 64, 5, 3.0);
    const AmeResult ame = adaptive_estimate(s[2], std::vector<Frame>{s[2], s[1], s[0]},
                                            std::vector<Frame>{s[2], s[3], s[4]});
    const MotionDecision d = select(s[2], s[0], s[4], 0.5);
    ASSERT_TRUE(d.use_prediction);
    const auto with = measure_bits(encode_motion(ame.flow_fwd, ame.flow_bwd, d, {}).bitstream);
    const auto without = measure_bits(encode_motion(ame.flow_fwd, ame.flow_bwd, no_prediction(64, 64), {}).bitstream);
    EXPECT_LT(with, without);
}

TEST(Codec, DecoderRederivesPrediction)
{
    const VideoSequence s = synthetic::pan_sequence(48, 48, 3, 2.0);
    const MotionDecision d = select(s[1], s[0], s[2], 0.5);
    ASSERT_TRUE(d.use_prediction);
    const FlowField ef = estimate(s[1], s[0]);
    const FlowField eb = estimate(s[1], s[2]);
    const EncodedMotion enc = encode_motion(ef, eb, d, {});
    const DecodedMotion dec = decode_motion_from_references(enc.bitstream, s[0], s[2], 0.5);
    EXPECT_EQ(dec.v_hat_fwd, enc.v_hat_fwd);
    EXPECT_EQ(dec.v_hat_bwd, enc.v_hat_bwd);
    EXPECT_EQ(dec.side_info.s, d.s_opt);
}
