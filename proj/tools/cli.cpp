#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "edgepupil/error.hpp"
#include "edgepupil/eval.hpp"
#include "edgepupil/image_io.hpp"
#include "edgepupil/params_io.hpp"
#include "edgepupil/pipeline.hpp"
#include "edgepupil/profile.hpp"
#include "edgepupil/synth.hpp"
#include "edgepupil/tuning.hpp"

namespace fs = std::filesystem;

namespace edgepupil::cli {

namespace {

// Validated inputs shared by every subcommand.
struct RunConfig {
    std::string input;
    std::string params_file;
    std::string out;
    std::string layout = "marker_session";
    std::string resolution;  // "WxH", optional expected frame size
    int verbosity = 0;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require_dir(const std::string& path, const char* flag)
{
    if (!fs::is_directory(path))
        throw IoError(fmt::format("{} {}: not a directory", flag, path));
}

void require_file(const std::string& path, const char* flag)
{
    if (!fs::is_regular_file(path))
        throw IoError(fmt::format("{} {}: no such file", flag, path));
}

// The parent of an output path must exist; nothing is created implicitly.
void require_writable_parent(const std::string& path, const char* flag)
{
    const fs::path parent = fs::absolute(path).parent_path();
    if (!fs::is_directory(parent))
        throw IoError(fmt::format("{} {}: parent directory does not exist", flag, path));
}

std::optional<ImageSize> parse_resolution(const std::string& text)
{
    if (text.empty())
        return std::nullopt;
    ImageSize size;
    char x = 0;
    std::istringstream ss(text);
    if (!(ss >> size.width >> x >> size.height) || x != 'x' || size.width <= 0 || size.height <= 0 || !ss.eof())
        throw UsageError("--resolution must look like 640x480 (width x height)");
    return size;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path + ": cannot open for writing");
    out << text;
    if (text.empty() || text.back() != '\n')
        out << '\n';
    if (!out)
        throw IoError(path + ": write failed");
}

void check_resolution(const GrayImage& img, const fs::path& p, const std::optional<ImageSize>& expected)
{
    if (expected && (img.width() != expected->width || img.height() != expected->height))
        throw FormatError(fmt::format("{}: {}x{} frame, expected {}x{}", p.string(), img.width(), img.height(),
                                      expected->width, expected->height));
}

std::vector<GrayImage> load_frames(const std::vector<fs::path>& paths, const std::optional<ImageSize>& expected)
{
    std::vector<GrayImage> frames;
    frames.reserve(paths.size());
    for (const auto& p : paths) {
        frames.push_back(read_image(p));
        check_resolution(frames.back(), p, expected);
    }
    return frames;
}

std::vector<fs::path> input_frames(const RunConfig& cfg)
{
    auto paths = list_frames(cfg.input);
    if (paths.empty())
        throw FormatError(cfg.input + ": no .png or .pgm frames");
    return paths;
}

int cmd_detect(const RunConfig& cfg, std::ostream& log)
{
    require_dir(cfg.input, "--input");
    require_file(cfg.params_file, "--params");
    require_writable_parent(cfg.out, "--out");
    const auto expected = parse_resolution(cfg.resolution);
    const DetectionParams params = load_params(cfg.params_file);
    const auto paths = input_frames(cfg);

    std::ostringstream csv;
    csv << "frame,found,cx,cy,n_contours\n";
    std::size_t found = 0;
    for (const auto& p : paths) {
        const GrayImage img = read_image(p);
        check_resolution(img, p, expected);
        const DetectionResult res = detect(img, params);
        if (res.pupil) {
            ++found;
            csv << fmt::format("{},true,{:.4f},{:.4f},{}\n", p.filename().string(), res.pupil->center.x,
                               res.pupil->center.y, res.n_contours);
        } else {
            csv << fmt::format("{},false,,,{}\n", p.filename().string(), res.n_contours);
        }
    }
    write_text(cfg.out, csv.str());
    if (cfg.verbosity > 0)
        log << fmt::format("detect: pupil found in {} of {} frames\n", found, paths.size());
    return kOk;
}

int cmd_tune(const RunConfig& cfg, const std::vector<double>& canny, const std::vector<int>& blur,
             const std::optional<double>& penalty, const std::string& details, std::ostream& log)
{
    require_dir(cfg.input, "--input");
    require_file(cfg.params_file, "--params");
    require_writable_parent(cfg.out, "--out");
    if (!details.empty())
        require_writable_parent(details, "--details");
    const auto expected = parse_resolution(cfg.resolution);
    const DetectionParams base = load_params(cfg.params_file);
    const auto frames = load_frames(input_frames(cfg), expected);

    LossOptions opts;
    opts.penalty = penalty;
    const auto records = grid_search(std::span<const GrayImage>(frames), canny, blur, base, opts);

    std::ostringstream csv;
    write_loss_csv(csv, records);
    write_text(cfg.out, csv.str());
    if (!details.empty()) {
        std::ostringstream jl;
        write_loss_jsonl(jl, records);
        write_text(details, jl.str());
    }
    if (cfg.verbosity > 0)
        log << fmt::format("tune: best t_canny={} k_blur={} mean_loss={}\n", records.front().t_canny,
                           records.front().k_blur, records.front().mean_loss);
    return kOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& curve, std::ostream& out, std::ostream& log)
{
    require_dir(cfg.input, "--input");
    require_file(cfg.params_file, "--params");
    require_writable_parent(cfg.out, "--out");
    if (!curve.empty())
        require_writable_parent(curve, "--curve");
    const auto expected = parse_resolution(cfg.resolution);
    const Layout layout = parse_layout(cfg.layout);
    const DetectionParams params = load_params(cfg.params_file);
    const AnnotatedSet set = load_annotated_set(cfg.input, layout);
    if (expected && !(set.resolution == *expected))
        throw FormatError(fmt::format("{}: {}x{} frames, expected {}x{}", cfg.input, set.resolution.width,
                                      set.resolution.height, expected->width, expected->height));
    if (cfg.verbosity > 0)
        log << fmt::format("eval: {} labeled frames, {} unlabeled\n", set.size(), set.unlabeled.size());

    const EvalReport report = evaluate(set, params);
    write_text(cfg.out, report_to_json(report));
    if (!curve.empty()) {
        std::ostringstream csv;
        write_curve_csv(csv, report);
        write_text(curve, csv.str());
    }
    out << fmt::format("frames={} detected={} unlabeled={} rate@5px={:.4f} rate@10px={:.4f}", report.per_frame.size(),
                       report.n_detected, report.n_unlabeled, report.rate_at_5px, report.rate_at_10px);
    if (report.mean_error_over_detected)
        out << fmt::format(" mean_error_px={:.4f}", *report.mean_error_over_detected);
    out << '\n';
    return kOk;
}

int cmd_bench(const RunConfig& cfg, std::size_t repeat, unsigned threads, const std::string& samples,
              std::ostream& out)
{
    require_dir(cfg.input, "--input");
    require_file(cfg.params_file, "--params");
    require_writable_parent(cfg.out, "--out");
    if (!samples.empty())
        require_writable_parent(samples, "--samples");
    const auto expected = parse_resolution(cfg.resolution);
    const DetectionParams params = load_params(cfg.params_file);
    const auto frames = load_frames(input_frames(cfg), expected);

    BenchOptions opts;
    opts.parallel_threads = threads;
    const TimingReport rep = bench(frames, params, repeat, opts);
    std::ostringstream csv;
    write_timing_csv(csv, rep);
    write_text(cfg.out, csv.str());
    if (!samples.empty())
        write_text(samples, timing_to_json(rep));

    if (const auto* total = rep.find(Stage::total))
        out << fmt::format("{}x{} frames={} repeat={} median_total_ms={:.3f}", rep.resolution.width,
                           rep.resolution.height, rep.frame_count, rep.repeat, total->median_ms);
    if (rep.peak_rss_kb)
        out << fmt::format(" peak_rss_kb={}", *rep.peak_rss_kb);
    else
        out << " peak_rss_kb=unavailable";
    if (rep.throughput_fps)
        out << fmt::format(" throughput_fps={:.1f}", *rep.throughput_fps);
    out << '\n';
    return kOk;
}

int cmd_synth(const std::string& spec_file, const std::string& out_dir, int verbosity, std::ostream& log)
{
    require_file(spec_file, "--spec");
    const SessionSpec spec = load_session_spec(spec_file);
    const AnnotatedSet set = make_session(spec, out_dir);
    if (verbosity > 0)
        log << fmt::format("synth: wrote {} frames ({} unlabeled) to {}\n", set.size() + set.unlabeled.size(),
                           set.unlabeled.size(), out_dir);
    return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Edge-analysis pupil detection: detect, tune, evaluate, benchmark, synthesize."};
    app.name(args.empty() ? "edgepupil" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&cfg](CLI::App* sub, bool with_input) {
        if (with_input)
            sub->add_option("--input", cfg.input, "Frame directory")->required();
        sub->add_option("--params", cfg.params_file, "DetectionParams JSON file")->required();
        sub->add_option("--out", cfg.out, "Output file")->required();
        sub->add_option("--resolution", cfg.resolution, "Expected frame size, e.g. 640x480");
        sub->add_flag("-v,--verbose", cfg.verbosity, "Progress messages on stderr");
    };

    auto* detect_cmd = app.add_subcommand("detect", "Detect the pupil in every frame; CSV per frame");
    add_common(detect_cmd, true);

    std::vector<double> canny;
    std::vector<int> blur;
    std::optional<double> penalty;
    std::string details;
    auto* tune_cmd = app.add_subcommand("tune", "Grid-search T_canny x K_blur by mean frame loss");
    add_common(tune_cmd, true);
    tune_cmd->add_option("--canny", canny, "Comma-separated Canny thresholds")->required()->delimiter(',');
    tune_cmd->add_option("--blur", blur, "Comma-separated odd median kernel sizes")->required()->delimiter(',');
    tune_cmd->add_option("--penalty", penalty, "Zero-contour penalty C (default 1000)");
    tune_cmd->add_option("--details", details, "Per-frame loss breakdown as JSON lines");

    std::string curve;
    auto* eval_cmd = app.add_subcommand("eval", "Score detections against annotated frames");
    add_common(eval_cmd, true);
    eval_cmd->add_option("--layout", cfg.layout, "Dataset layout")
        ->check(CLI::IsMember({"lpw_frames", "marker_session", "free_movement_session"}));
    eval_cmd->add_option("--curve", curve, "Cumulative curve as CSV (e_px,rate)");

    std::size_t repeat = 1;
    unsigned threads = 0;
    std::string samples;
    auto* bench_cmd = app.add_subcommand("bench", "Per-stage latency over a frame directory");
    add_common(bench_cmd, true);
    bench_cmd->add_option("--repeat", repeat, "Timed sweeps after one warm-up sweep")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--threads", threads, "Also measure parallel throughput on N threads");
    bench_cmd->add_option("--samples", samples, "Full JSON dump including every sample");

    std::string spec_file, synth_out;
    int synth_verbosity = 0;
    auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic annotated session");
    synth_cmd->add_option("--spec", spec_file, "Session spec JSON")->required();
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_flag("-v,--verbose", synth_verbosity, "Progress messages on stderr");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    if (argv.empty())
        argv.push_back("edgepupil");

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kOk;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        err << app.get_name() << ": " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }

    try {
        if (detect_cmd->parsed())
            return cmd_detect(cfg, err);
        if (tune_cmd->parsed())
            return cmd_tune(cfg, canny, blur, penalty, details, err);
        if (eval_cmd->parsed())
            return cmd_eval(cfg, curve, out, err);
        if (bench_cmd->parsed())
            return cmd_bench(cfg, repeat, threads, samples, out);
        if (synth_cmd->parsed())
            return cmd_synth(spec_file, synth_out, synth_verbosity, err);
        err << app.help();
        return kUsage;
    } catch (const UsageError& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        return kUsage;
    } catch (const BenchAborted& e) {
        err << app.get_name() << ": " << e.what() << fmt::format(" ({} stages measured before the failure)\n",
                                                                 e.partial.stages.size());
        return kData;
    } catch (const Error& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << app.get_name() << ": internal error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace edgepupil::cli
