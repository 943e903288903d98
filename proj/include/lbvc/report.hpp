#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "gop.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"

namespace lbvc {

inline constexpr int kReportSchemaVersion = 1;

inline constexpr const char* kQualityNote =
    "quality is the PSNR of the motion-compensated prediction (mean of both warped references); "
    "references are the uncompressed originals because texture coding is not modelled";

// Settings echoed into every report so a run can be reproduced from its output.
struct RunConfig
{
    AmeConfig ame;
    AmpConfig amp;
    QuantParams quant;
    int gop_size = 32;
    int intra_period = 32;
    std::string input;
};

inline nlohmann::ordered_json to_json(const EstimatorParams& p)
{
    return {{"pyramid_levels", p.pyramid_levels},
            {"iterations_per_level", p.iterations_per_level},
            {"smoothness_weight", p.smoothness_weight},
            {"downscale_ratio", p.downscale_ratio}};
}

inline std::string_view to_string(AmePolicy p)
{
    switch (p) {
    case AmePolicy::DirectOnly:
        return "direct-only";
    case AmePolicy::AccumulateOnly:
        return "accumulate-only";
    default:
        return "adaptive";
    }
}

inline nlohmann::ordered_json to_json(const RunConfig& c)
{
    return {{"input", c.input},
            {"gop_size", c.gop_size},
            {"intra_period", c.intra_period},
            {"mif_threshold", c.ame.mif_threshold},
            {"ame_policy", to_string(c.ame.policy)},
            {"refine_each_step", c.ame.refine_each_step},
            {"amp_enabled", c.amp.enabled},
            {"amp_gate", c.amp.gate},
            {"amp_factors", c.amp.factors},
            {"amp_psnr_threshold", c.amp.psnr_threshold},
            {"quant_step", c.quant.effective_step()},
            {"estimator", to_json(c.ame.estimator)}};
}

inline nlohmann::ordered_json to_json(const FrameRecord& r)
{
    nlohmann::ordered_json psnrs = nlohmann::ordered_json::object();
    for (const auto& [s, v] : r.psnr_by_factor) {
        psnrs[std::to_string(s)] = v;
    }
    nlohmann::ordered_json j{{"display_index", r.display_index},
                             {"coding_order", r.coding_order},
                             {"temporal_level", r.temporal_level},
                             {"distortion_weight", r.distortion_weight},
                             {"ref_fwd", r.ref_fwd},
                             {"ref_bwd", r.ref_bwd},
                             {"tau", r.tau},
                             {"mode", to_string(r.mode)},
                             {"mif_fwd", r.mif_fwd},
                             {"mif_bwd", r.mif_bwd},
                             {"s_opt", r.s_opt},
                             {"use_prediction", r.use_prediction},
                             {"psnr_by_factor", psnrs}};
    j["amp_psnr"] = r.amp_psnr ? nlohmann::ordered_json(*r.amp_psnr) : nlohmann::ordered_json(nullptr);
    j["prediction_psnr"] = r.prediction_psnr;
    j["motion_bits"] = r.motion_bits;
    return j;
}

inline nlohmann::ordered_json to_json(const SequenceReport& rep)
{
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    for (const FrameRecord& r : rep.records) {
        frames.push_back(to_json(r));
    }
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rep.mode_histogram()) {
        hist[k] = v;
    }
    return {{"width", rep.width},
            {"height", rep.height},
            {"num_frames", rep.num_frames},
            {"b_frames", rep.records.size()},
            {"frames", frames},
            {"aggregates",
             {{"mean_prediction_psnr", rep.mean_prediction_psnr()},
              {"mean_amp_psnr", rep.mean_amp_psnr()},
              {"total_motion_bits", rep.total_motion_bits()},
              {"bits_per_pixel", rep.bits_per_pixel()},
              {"mode_histogram", hist}}}};
}

inline nlohmann::ordered_json make_report(const RunConfig& cfg, const SequenceReport& rep)
{
    nlohmann::ordered_json j{{"schema_version", kReportSchemaVersion}, {"note", kQualityNote}};
    j["config"] = to_json(cfg);
    j["sequence"] = to_json(rep);
    return j;
}

inline nlohmann::ordered_json to_json(const Schedule& s)
{
    nlohmann::ordered_json units = nlohmann::ordered_json::array();
    for (const CodingUnit& u : s.units) {
        nlohmann::ordered_json j{{"display_index", u.display_index},
                                 {"coding_order", u.coding_order},
                                 {"type", to_string(u.type)},
                                 {"temporal_level", u.temporal_level}};
        j["ref_fwd"] = u.ref_fwd ? nlohmann::ordered_json(*u.ref_fwd) : nlohmann::ordered_json(nullptr);
        j["ref_bwd"] = u.ref_bwd ? nlohmann::ordered_json(*u.ref_bwd) : nlohmann::ordered_json(nullptr);
        j["distortion_weight"] = u.distortion_weight;
        units.push_back(std::move(j));
    }
    return {{"schema_version", kReportSchemaVersion},
            {"gop_size", s.gop_size},
            {"intra_period", s.intra_period},
            {"units", units}};
}

inline nlohmann::ordered_json to_json(const AblationTable& t)
{
    nlohmann::ordered_json arms = nlohmann::ordered_json::array();
    for (const ArmResult& a : t.arms) {
        arms.push_back({{"name", a.name},
                        {"mean_prediction_psnr", a.mean_prediction_psnr},
                        {"mean_amp_psnr", a.mean_amp_psnr},
                        {"motion_bits", a.motion_bits},
                        {"delta_psnr_db", a.delta_psnr_db},
                        {"delta_bits_pct", a.delta_bits_pct},
                        {"mode_histogram", to_json(a.report)["aggregates"]["mode_histogram"]}});
    }
    return {{"schema_version", kReportSchemaVersion}, {"note", kQualityNote}, {"anchor", t.anchor}, {"arms", arms}};
}

// RD curves as CSV: one "rate_bpp,psnr_db" pair per line; a header line of that text,
// blank lines and '#' comments are skipped.
inline std::vector<RdPoint> parse_rd_csv(std::istream& in, const std::string& name = "curve")
{
    std::vector<RdPoint> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        if (line.find("rate_bpp") != std::string::npos) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw FormatError(name + ":" + std::to_string(lineno) + ": expected 'rate_bpp,psnr_db'");
        }
        RdPoint p;
        try {
            std::size_t used = 0;
            const std::string a = line.substr(0, comma);
            const std::string b = line.substr(comma + 1);
            p.rate = std::stod(a, &used);
            if (a.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(a);
            }
            p.quality = std::stod(b, &used);
            if (b.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(b);
            }
        } catch (const std::logic_error&) {
            throw FormatError(name + ":" + std::to_string(lineno) + ": not a number pair");
        }
        out.push_back(p);
    }
    return out;
}

inline std::vector<RdPoint> read_rd_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    return parse_rd_csv(in, path.string());
}

inline std::string format_rd_csv(const std::vector<RdPoint>& curve)
{
    std::ostringstream os;
    os.precision(10);
    os << "rate_bpp,psnr_db\n";
    for (const RdPoint& p : curve) {
        os << p.rate << ',' << p.quality << '\n';
    }
    return os.str();
}

} // namespace lbvc
