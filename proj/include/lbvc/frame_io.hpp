#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "frame.hpp"

namespace lbvc {

static_assert(std::endian::native == std::endian::little, ".flo and 10-bit YUV I/O assume a little-endian host");

enum class ChromaFormat { Yuv420, Mono };

struct Y4mHeader
{
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    ChromaFormat chroma = ChromaFormat::Yuv420;
    double frame_rate = 25.0;
};

namespace detail {

inline std::size_t chroma_plane_samples(int width, int height)
{
    return static_cast<std::size_t>((width + 1) / 2) * static_cast<std::size_t>((height + 1) / 2);
}

inline std::size_t frame_bytes(int width, int height, int bit_depth, ChromaFormat chroma)
{
    const std::size_t luma = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t samples = chroma == ChromaFormat::Yuv420 ? luma + 2 * chroma_plane_samples(width, height) : luma;
    return samples * (bit_depth > 8 ? 2u : 1u);
}

inline Frame decode_luma(const std::vector<unsigned char>& bytes, int width, int height, int bit_depth)
{
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<float> samples(n);
    if (bit_depth == 8) {
        for (std::size_t i = 0; i < n; ++i) {
            samples[i] = static_cast<float>(bytes[i] / 255.0);
        }
    } else {
        const double maxval = static_cast<double>((1 << bit_depth) - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned v = static_cast<unsigned>(bytes[2 * i]) | (static_cast<unsigned>(bytes[2 * i + 1]) << 8);
            samples[i] = static_cast<float>(std::min(1.0, v / maxval));
        }
    }
    return Frame(width, height, std::move(samples));
}

inline std::ifstream open_binary(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParameterError("cannot open " + path.string());
    }
    return in;
}

inline double parse_rate(const std::string& token)
{
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
        throw FormatError("bad Y4M frame rate '" + token + "'");
    }
    const double num = std::stod(token.substr(0, colon));
    const double den = std::stod(token.substr(colon + 1));
    return den > 0 ? num / den : 0.0;
}

} // namespace detail

inline Y4mHeader parse_y4m_header(const std::string& line)
{
    std::istringstream ss(line);
    std::string magic;
    ss >> magic;
    if (magic != "YUV4MPEG2") {
        throw FormatError("missing YUV4MPEG2 signature");
    }
    Y4mHeader h;
    std::string tok;
    try {
        while (ss >> tok) {
            const char tag = tok[0];
            const std::string value = tok.substr(1);
            switch (tag) {
            case 'W': h.width = std::stoi(value); break;
            case 'H': h.height = std::stoi(value); break;
            case 'F': h.frame_rate = detail::parse_rate(value); break;
            case 'C':
                if (value.rfind("420", 0) == 0) {
                    h.chroma = ChromaFormat::Yuv420;
                    h.bit_depth = value.find("p10") != std::string::npos ? 10 : 8;
                } else if (value.rfind("mono", 0) == 0) {
                    h.chroma = ChromaFormat::Mono;
                    h.bit_depth = value == "mono10" ? 10 : 8;
                } else {
                    throw FormatError("unsupported Y4M colour space C" + value);
                }
                break;
            default: break; // I, A, X and unknown tags carry nothing we need
            }
        }
    } catch (const std::logic_error&) {
        throw FormatError("malformed Y4M header token '" + tok + "'");
    }
    if (h.width <= 0 || h.height <= 0) {
        throw FormatError("Y4M header lacks valid W/H");
    }
    return h;
}

inline VideoSequence load_y4m(const std::filesystem::path& path, std::size_t max_frames)
{
    auto in = detail::open_binary(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("empty Y4M file " + path.string());
    }
    const Y4mHeader h = parse_y4m_header(line);
    const std::size_t fbytes = detail::frame_bytes(h.width, h.height, h.bit_depth, h.chroma);

    VideoSequence seq;
    seq.frame_rate = h.frame_rate;
    std::vector<unsigned char> buf(fbytes);
    while (seq.frames.size() < max_frames) {
        const long index = static_cast<long>(seq.frames.size());
        if (!std::getline(in, line)) {
            break;
        }
        if (line.rfind("FRAME", 0) != 0) {
            throw FormatError("expected FRAME marker at frame " + std::to_string(index));
        }
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(fbytes));
        if (static_cast<std::size_t>(in.gcount()) != fbytes) {
            throw TruncationError("truncated Y4M frame payload", index);
        }
        seq.frames.push_back(detail::decode_luma(buf, h.width, h.height, h.bit_depth));
    }
    if (seq.frames.empty()) {
        throw TruncationError("Y4M file contains no complete frame", 0);
    }
    return seq;
}

inline VideoSequence load_raw_yuv(const std::filesystem::path& path, int width, int height, int bit_depth,
                                  std::size_t max_frames)
{
    if (width <= 0 || height <= 0) {
        throw ParameterError("raw YUV dimensions must be positive");
    }
    if (bit_depth != 8 && bit_depth != 10) {
        throw ParameterError("raw YUV bit depth must be 8 or 10");
    }
    const std::size_t fbytes = detail::frame_bytes(width, height, bit_depth, ChromaFormat::Yuv420);
    std::error_code ec;
    const auto file_size = std::filesystem::file_size(path, ec);
    if (ec) {
        throw ParameterError("cannot stat " + path.string());
    }
    if (file_size == 0 || file_size % fbytes != 0) {
        throw GeometryError("file size " + std::to_string(file_size) + " is not a positive multiple of the " +
                            std::to_string(fbytes) + "-byte frame size");
    }
    const std::size_t count = std::min<std::size_t>(file_size / fbytes, max_frames);
    auto in = detail::open_binary(path);
    VideoSequence seq;
    std::vector<unsigned char> buf(fbytes);
    for (std::size_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(fbytes));
        if (static_cast<std::size_t>(in.gcount()) != fbytes) {
            throw TruncationError("truncated raw YUV frame", static_cast<long>(i));
        }
        seq.frames.push_back(detail::decode_luma(buf, width, height, bit_depth));
    }
    return seq;
}

namespace detail {

inline void append_luma(std::vector<unsigned char>& out, const Frame& f)
{
    for (float s : f.samples()) {
        out.push_back(static_cast<unsigned char>(std::lround(std::clamp(s, 0.0f, 1.0f) * 255.0f)));
    }
}

inline void append_neutral_chroma(std::vector<unsigned char>& out, const Frame& f)
{
    out.insert(out.end(), 2 * chroma_plane_samples(f.width(), f.height()), 128);
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParameterError("cannot create " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ParameterError("write failed: " + path.string());
    }
}

} // namespace detail

// 8-bit 4:2:0 output; luma from the frames, chroma planes set to mid-grey.
inline void write_raw_yuv(const VideoSequence& seq, const std::filesystem::path& path)
{
    seq.validate();
    std::vector<unsigned char> bytes;
    for (const Frame& f : seq.frames) {
        detail::append_luma(bytes, f);
        detail::append_neutral_chroma(bytes, f);
    }
    detail::write_bytes(path, bytes);
}

inline void write_y4m(const VideoSequence& seq, const std::filesystem::path& path)
{
    seq.validate();
    const long rate = std::lround(seq.frame_rate);
    const std::string header = "YUV4MPEG2 W" + std::to_string(seq.width()) + " H" + std::to_string(seq.height()) +
                               " F" + std::to_string(rate > 0 ? rate : 25) + ":1 Ip A1:1 C420jpeg\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    static constexpr char kFrame[] = "FRAME\n";
    for (const Frame& f : seq.frames) {
        bytes.insert(bytes.end(), kFrame, kFrame + 6);
        detail::append_luma(bytes, f);
        detail::append_neutral_chroma(bytes, f);
    }
    detail::write_bytes(path, bytes);
}

// Binary PGM (P5, maxval 255).
inline void write_pgm(const Frame& frame, const std::filesystem::path& path)
{
    const std::string header =
        "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    detail::append_luma(bytes, frame);
    detail::write_bytes(path, bytes);
}

// Middlebury .flo: "PIEH", int32 width, int32 height, then interleaved float32 (dx, dy), row-major.
inline void write_flo(const FlowField& flow, const std::filesystem::path& path)
{
    if (!flow.all_finite()) {
        throw ParameterError("write_flo: flow contains non-finite values");
    }
    std::vector<unsigned char> bytes;
    bytes.reserve(12 + flow.size() * 8);
    const auto put = [&bytes](const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        bytes.insert(bytes.end(), c, c + n);
    };
    put("PIEH", 4);
    const std::int32_t w = flow.width();
    const std::int32_t h = flow.height();
    put(&w, 4);
    put(&h, 4);
    for (std::size_t i = 0; i < flow.size(); ++i) {
        put(&flow.dx()[i], 4);
        put(&flow.dy()[i], 4);
    }
    detail::write_bytes(path, bytes);
}

inline FlowField read_flo(const std::filesystem::path& path)
{
    auto in = detail::open_binary(path);
    char magic[4] = {};
    std::int32_t w = 0;
    std::int32_t h = 0;
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "PIEH", 4) != 0) {
        throw FormatError("bad .flo magic in " + path.string());
    }
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (!in || w < 1 || h < 1 || w > 99999 || h > 99999) {
        throw FormatError("bad .flo dimensions in " + path.string());
    }
    FlowField flow(w, h);
    std::vector<float> row(static_cast<std::size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (static_cast<std::size_t>(in.gcount()) != row.size() * sizeof(float)) {
            throw TruncationError(".flo payload too short", 0);
        }
        for (int x = 0; x < w; ++x) {
            flow.dx(x, y) = row[2 * static_cast<std::size_t>(x)];
            flow.dy(x, y) = row[2 * static_cast<std::size_t>(x) + 1];
        }
    }
    return flow;
}

// Flow magnitude as a PGM; `max_magnitude` maps to white (auto-scaled when <= 0).
inline Frame flow_magnitude_image(const FlowField& flow, double max_magnitude = 0.0)
{
    std::vector<float> mag(flow.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < flow.size(); ++i) {
        mag[i] = std::hypot(flow.dx()[i], flow.dy()[i]);
        peak = std::max(peak, static_cast<double>(mag[i]));
    }
    const double scale = max_magnitude > 0 ? max_magnitude : (peak > 0 ? peak : 1.0);
    for (float& m : mag) {
        m = static_cast<float>(std::min(1.0, m / scale));
    }
    return Frame(flow.width(), flow.height(), std::move(mag));
}

} // namespace lbvc
