// lbvc: long-term motion analysis for hierarchical-B coding on classical optical flow.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbvc.hpp"

namespace fs = std::filesystem;
using namespace lbvc;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitData = 3;

struct GlobalOptions
{
    double mif_threshold = 10.0;
    std::vector<int> amp_factors{1, 2, 3, 4};
    double amp_psnr_threshold = 20.0;
    double quant_step = 0.25;
    int gop = 32;
    int intra_period = 32;
    std::size_t frames = 0; // 0 = all
    int pyramid_levels = 5;
    int iterations = 60;
    double smoothness = 15.0;
};

struct InputOptions
{
    std::string path;
    int width = 0;
    int height = 0;
    int bit_depth = 8;
};

RunConfig make_config(const GlobalOptions& g)
{
    RunConfig c;
    c.ame.mif_threshold = g.mif_threshold;
    c.ame.estimator.pyramid_levels = g.pyramid_levels;
    c.ame.estimator.iterations_per_level = g.iterations;
    c.ame.estimator.smoothness_weight = g.smoothness;
    c.amp.factors = g.amp_factors;
    c.amp.psnr_threshold = g.amp_psnr_threshold;
    c.quant.step = g.quant_step;
    c.gop_size = g.gop;
    c.intra_period = g.intra_period;
    c.ame.validate();
    c.amp.validate();
    c.quant.fixed_point();
    return c;
}

VideoSequence load_input(const InputOptions& in, const GlobalOptions& g)
{
    const std::size_t limit = g.frames == 0 ? static_cast<std::size_t>(-1) : g.frames;
    if (fs::path(in.path).extension() == ".y4m") {
        return load_y4m(in.path, limit);
    }
    if (in.width <= 0 || in.height <= 0) {
        throw ParameterError("raw input needs --width and --height");
    }
    return load_raw_yuv(in.path, in.width, in.height, in.bit_depth, limit);
}

void add_input_options(CLI::App* cmd, InputOptions& in)
{
    cmd->add_option("input", in.path, "Y4M file, or raw 4:2:0 YUV with --width/--height")->required();
    cmd->add_option("--width", in.width, "raw YUV width");
    cmd->add_option("--height", in.height, "raw YUV height");
    cmd->add_option("--bit-depth", in.bit_depth, "raw YUV bit depth (8 or 10)");
}

void emit(const std::string& text, const std::string& out_path)
{
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        throw ParameterError("cannot write " + out_path);
    }
    f << text;
}

std::string dump(const nlohmann::ordered_json& j)
{
    return j.dump(2) + "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive long-term motion estimation and prediction for hierarchical-B video"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value configuration file");

    GlobalOptions g;
    app.add_option("--mif-threshold", g.mif_threshold, "mean flow magnitude above which accumulation is used")
        ->capture_default_str();
    app.add_option("--amp-factors", g.amp_factors, "candidate downsampling factors")->delimiter(',')->capture_default_str();
    app.add_option("--amp-psnr-threshold", g.amp_psnr_threshold, "minimum prediction PSNR (dB) to use AMP")
        ->capture_default_str();
    app.add_option("--quant-step", g.quant_step, "motion residual quantisation step (px)")->capture_default_str();
    app.add_option("--gop", g.gop, "GoP size (power of two)")->capture_default_str();
    app.add_option("--intra-period", g.intra_period, "intra period (multiple of the GoP size)")->capture_default_str();
    app.add_option("--frames", g.frames, "maximum frames to read (0 = all)")->capture_default_str();
    app.add_option("--pyramid-levels", g.pyramid_levels, "flow pyramid levels")->capture_default_str();
    app.add_option("--iterations", g.iterations, "Horn-Schunck sweeps per level")->capture_default_str();
    app.add_option("--smoothness", g.smoothness, "Horn-Schunck smoothness weight")->capture_default_str();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "run the motion pipeline and write a JSON report");
    InputOptions a_in;
    std::string a_out;
    std::string a_streams;
    std::string a_rd;
    std::vector<double> a_rd_steps{1.0, 0.5, 0.25, 0.125};
    add_input_options(analyze, a_in);
    analyze->add_option("-o,--output", a_out, "report path (default stdout)");
    analyze->add_option("--dump-streams", a_streams, "directory for per-frame motion streams (.lbm)");
    analyze->add_option("--rd-csv", a_rd, "also sweep --rd-steps and write an RD curve CSV here");
    analyze->add_option("--rd-steps", a_rd_steps, "quantisation steps for the RD sweep")->delimiter(',');
    analyze->fallthrough();

    // schedule
    auto* schedule = app.add_subcommand("schedule", "print the hierarchical-B schedule as JSON");
    int s_frames = 33;
    std::string s_out;
    schedule->add_option("num_frames", s_frames, "sequence length")->required();
    schedule->add_option("-o,--output", s_out, "output path (default stdout)");
    schedule->fallthrough();

    // ablate
    auto* ablate = app.add_subcommand("ablate", "compare motion estimation / prediction arms");
    InputOptions b_in;
    std::vector<std::string> b_arms;
    std::string b_anchor;
    std::string b_out;
    add_input_options(ablate, b_in);
    ablate->add_option("--arms", b_arms, "arms '<me>+<mp>', me: direct-only|accumulate-no-refine|accumulate-refine|ame, "
                                         "mp: no-mp|amp|s1-2-4")
        ->delimiter(',')
        ->required();
    ablate->add_option("--anchor", b_anchor, "arm the deltas refer to (default first)");
    ablate->add_option("-o,--output", b_out, "output path (default stdout)");
    ablate->fallthrough();

    // flow
    auto* flow = app.add_subcommand("flow", "estimate the flow between two frames of a sequence");
    InputOptions f_in;
    int f_target = 1;
    int f_reference = 0;
    std::string f_flo;
    std::string f_pgm;
    add_input_options(flow, f_in);
    flow->add_option("--target", f_target, "frame the flow is defined on")->capture_default_str();
    flow->add_option("--reference", f_reference, "frame the flow points into")->capture_default_str();
    flow->add_option("--flo", f_flo, ".flo output")->required();
    flow->add_option("--magnitude", f_pgm, "flow magnitude PGM output");
    flow->fallthrough();

    // bdrate
    auto* bdrate = app.add_subcommand("bdrate", "Bjontegaard delta rate between two RD curves");
    std::string r_anchor;
    std::string r_test;
    bdrate->add_option("anchor", r_anchor, "anchor CSV (rate_bpp,psnr_db)")->required();
    bdrate->add_option("test", r_test, "test CSV (rate_bpp,psnr_db)")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic panning sequence as Y4M");
    int y_width = 64;
    int y_height = 64;
    int y_frames = 17;
    double y_dx = 4.0;
    double y_dy = 0.0;
    double y_noise = 0.0;
    unsigned y_seed = 1;
    std::string y_out;
    synth->add_option("output", y_out, "Y4M path")->required();
    synth->add_option("--width", y_width)->capture_default_str();
    synth->add_option("--height", y_height)->capture_default_str();
    synth->add_option("--count", y_frames, "frame count")->capture_default_str();
    synth->add_option("--dx", y_dx, "horizontal pan per frame (px)")->capture_default_str();
    synth->add_option("--dy", y_dy, "vertical pan per frame (px)")->capture_default_str();
    synth->add_option("--noise", y_noise, "Gaussian noise sigma on [0,1] samples")->capture_default_str();
    synth->add_option("--seed", y_seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            RunConfig cfg = make_config(g);
            cfg.input = fs::path(a_in.path).filename().string();
            const VideoSequence seq = load_input(a_in, g);
            const Schedule sched = build_schedule(static_cast<int>(seq.size()), cfg.gop_size, cfg.intra_period);
            const SequenceReport rep = run_pipeline(seq, sched, cfg.ame, cfg.amp, cfg.quant);
            emit(dump(make_report(cfg, rep)), a_out);

            if (!a_streams.empty()) {
                fs::create_directories(a_streams);
                for (const FrameRecord& r : rep.records) {
                    char name[32];
                    std::snprintf(name, sizeof name, "frame_%04d.lbm", r.display_index);
                    std::ofstream f(fs::path(a_streams) / name, std::ios::binary);
                    f.write(reinterpret_cast<const char*>(r.stream.data()), static_cast<std::streamsize>(r.stream.size()));
                }
            }
            if (!a_rd.empty()) {
                std::vector<RdPoint> curve;
                for (double step : a_rd_steps) {
                    RunConfig c = cfg;
                    c.quant.step = step;
                    const SequenceReport r = run_pipeline(seq, sched, c.ame, c.amp, c.quant);
                    curve.push_back({r.bits_per_pixel(), r.mean_prediction_psnr()});
                }
                std::sort(curve.begin(), curve.end(), [](const RdPoint& x, const RdPoint& y) { return x.rate < y.rate; });
                emit(format_rd_csv(curve), a_rd);
            }
        } else if (schedule->parsed()) {
            const Schedule s = build_schedule(s_frames, g.gop, g.intra_period);
            emit(dump(to_json(s)), s_out);
        } else if (ablate->parsed()) {
            const RunConfig cfg = make_config(g);
            const VideoSequence seq = load_input(b_in, g);
            const Schedule sched = build_schedule(static_cast<int>(seq.size()), cfg.gop_size, cfg.intra_period);
            const AblationTable t = ablation(seq, sched, b_arms, b_anchor, cfg.ame, cfg.amp, cfg.quant);
            emit(dump(to_json(t)), b_out);
        } else if (flow->parsed()) {
            const RunConfig cfg = make_config(g);
            const VideoSequence seq = load_input(f_in, g);
            const int n = static_cast<int>(seq.size());
            if (f_target < 0 || f_target >= n || f_reference < 0 || f_reference >= n) {
                throw ParameterError("frame index out of range (sequence has " + std::to_string(n) + " frames)");
            }
            const FlowField v = estimate(seq[static_cast<std::size_t>(f_target)],
                                         seq[static_cast<std::size_t>(f_reference)], cfg.ame.estimator);
            write_flo(v, f_flo);
            if (!f_pgm.empty()) {
                write_pgm(flow_magnitude_image(v), f_pgm);
            }
            std::cout << "mif " << mif(v) << "\n";
        } else if (bdrate->parsed()) {
            const auto anchor = read_rd_csv(r_anchor);
            const auto test = read_rd_csv(r_test);
            std::printf("%.4f\n", bd_rate(anchor, test));
        } else if (synth->parsed()) {
            VideoSequence seq = synthetic::pan_sequence(y_width, y_height, y_frames, y_dx, y_dy, y_seed);
            if (y_noise > 0.0) {
                seq = synthetic::add_noise(std::move(seq), y_noise, y_seed);
            }
            write_y4m(seq, y_out);
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DecodeError& e) {
        std::cerr << "decode error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitInput;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitInput;
    }
    return 0;
}
