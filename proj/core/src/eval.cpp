#include "edgepupil/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "edgepupil/error.hpp"

namespace fs = std::filesystem;

namespace edgepupil {

Layout parse_layout(std::string_view name)
{
    if (name == "lpw_frames")
        return Layout::lpw_frames;
    if (name == "marker_session")
        return Layout::marker_session;
    if (name == "free_movement_session")
        return Layout::free_movement_session;
    throw InvalidArgument("unknown layout \"" + std::string(name) +
                          "\" (expected lpw_frames, marker_session or free_movement_session)");
}

std::string_view layout_name(Layout layout) noexcept
{
    switch (layout) {
    case Layout::lpw_frames: return "lpw_frames";
    case Layout::marker_session: return "marker_session";
    case Layout::free_movement_session: return "free_movement_session";
    }
    return "unknown";
}

namespace {

std::string trim(std::string s)
{
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_number(const std::string& tok, const fs::path& file, std::size_t line)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != tok.size() || !std::isfinite(v))
        throw FormatError(fmt::format("{}:{}: cannot parse number \"{}\"", file.string(), line, tok));
    return v;
}

bool is_numbered_frame(const fs::path& p)
{
    const std::string stem = p.stem().string();
    return !stem.empty() && std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); });
}

fs::path find_lpw_annotations(const fs::path& root)
{
    fs::path dir = root;
    if (dir.filename().empty())
        dir = dir.parent_path();
    fs::path sibling = dir;
    sibling += ".txt";
    if (fs::is_regular_file(sibling))
        return sibling;

    std::vector<fs::path> inside;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            inside.push_back(entry.path());
    if (inside.size() == 1)
        return inside.front();
    if (inside.empty())
        throw FormatError(dir.string() + ": no annotation file (expected " + sibling.string() + " or one *.txt inside)");
    throw FormatError(dir.string() + ": more than one *.txt annotation file");
}

void load_lpw(const fs::path& root, AnnotatedSet& set)
{
    std::vector<fs::path> frames;
    for (const auto& f : list_frames(root))
        if (is_numbered_frame(f))
            frames.push_back(f);
    std::sort(frames.begin(), frames.end(), [](const fs::path& a, const fs::path& b) {
        return std::stoull(a.stem().string()) < std::stoull(b.stem().string());
    });

    const fs::path ann = find_lpw_annotations(root);
    std::ifstream in(ann);
    if (!in)
        throw IoError(ann.string() + ": cannot open");
    std::vector<Point2d> truth;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty())
            continue;
        std::istringstream ss(line);
        std::string xs, ys, extra;
        if (!(ss >> xs >> ys) || (ss >> extra))
            throw FormatError(fmt::format("{}:{}: expected \"x y\"", ann.string(), lineno));
        truth.push_back({parse_number(xs, ann, lineno), parse_number(ys, ann, lineno)});
    }
    if (truth.size() != frames.size())
        throw FormatError(fmt::format("{}: {} frames but {} annotation lines in {}", root.string(), frames.size(),
                                      truth.size(), ann.string()));
    set.frames = std::move(frames);
    set.truth = std::move(truth);
}

void load_labels_csv(const fs::path& root, AnnotatedSet& set)
{
    const fs::path labels = root / "labels.csv";
    std::ifstream in(labels);
    if (!in)
        throw FormatError(root.string() + ": missing labels.csv");

    std::string line;
    if (!std::getline(in, line) || trim(line) != "frame,x,y")
        throw FormatError(labels.string() + ":1: header must be \"frame,x,y\"");

    const auto images = list_frames(root);
    std::size_t rows = 0;
    std::size_t lineno = 1;
    std::map<std::string, bool> seen;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty())
            continue;
        ++rows;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ','))
            cols.push_back(trim(col));
        if (!line.empty() && line.back() == ',')
            cols.emplace_back();
        if (cols.size() != 3)
            throw FormatError(fmt::format("{}:{}: expected 3 columns, got {}", labels.string(), lineno, cols.size()));

        const fs::path frame = root / cols[0];
        if (cols[0].empty() || !fs::is_regular_file(frame))
            throw FormatError(fmt::format("{}:{}: frame \"{}\" not found", labels.string(), lineno, cols[0]));
        if (seen[cols[0]])
            throw FormatError(fmt::format("{}:{}: frame \"{}\" listed twice", labels.string(), lineno, cols[0]));
        seen[cols[0]] = true;

        if (cols[1].empty() && cols[2].empty()) {
            set.unlabeled.push_back(frame);
            continue;
        }
        if (cols[1].empty() || cols[2].empty())
            throw FormatError(fmt::format("{}:{}: x and y must both be present or both empty", labels.string(), lineno));
        set.frames.push_back(frame);
        set.truth.push_back({parse_number(cols[1], labels, lineno), parse_number(cols[2], labels, lineno)});
    }
    if (rows != images.size())
        throw FormatError(fmt::format("{}: {} frames but {} label rows", root.string(), images.size(), rows));
}

}  // namespace

AnnotatedSet load_annotated_set(const fs::path& root, Layout layout)
{
    if (!fs::is_directory(root))
        throw IoError(root.string() + ": not a directory");

    AnnotatedSet set;
    if (layout == Layout::lpw_frames)
        load_lpw(root, set);
    else
        load_labels_csv(root, set);

    const fs::path& probe = !set.frames.empty() ? set.frames.front()
                            : !set.unlabeled.empty() ? set.unlabeled.front()
                                                     : fs::path{};
    if (!probe.empty())
        set.resolution = read_image_size(probe);
    for (std::size_t i = 0; i < set.truth.size(); ++i) {
        const Point2d& t = set.truth[i];
        if (!(t.x >= 0.0 && t.y >= 0.0 && t.x < set.resolution.width && t.y < set.resolution.height))
            throw FormatError(fmt::format("{}: truth ({}, {}) of frame {} lies outside the {}x{} frame",
                                          root.string(), t.x, t.y, set.frames[i].filename().string(),
                                          set.resolution.width, set.resolution.height));
    }
    return set;
}

double detection_rate(std::span<const FrameError> per_frame, double e_px) noexcept
{
    if (per_frame.empty())
        return 0.0;
    const auto hits = std::count_if(per_frame.begin(), per_frame.end(),
                                    [e_px](const FrameError& f) { return f.l2 && *f.l2 <= e_px; });
    return static_cast<double>(hits) / static_cast<double>(per_frame.size());
}

EvalReport build_report(std::span<const Point2d> truth, std::span<const std::optional<Point2d>> detected)
{
    if (truth.size() != detected.size())
        throw InvalidArgument(fmt::format("build_report: {} truth points but {} detections", truth.size(),
                                          detected.size()));
    EvalReport rep;
    rep.per_frame.reserve(truth.size());
    double err_sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        FrameError fe;
        fe.index = i;
        fe.truth = truth[i];
        fe.detected = detected[i];
        if (fe.detected) {
            fe.l2 = std::hypot(fe.detected->x - fe.truth.x, fe.detected->y - fe.truth.y);
            err_sum += *fe.l2;
            ++rep.n_detected;
        }
        rep.per_frame.push_back(fe);
    }

    // Sorted errors make every curve point a binary search.
    std::vector<double> errs;
    errs.reserve(rep.n_detected);
    for (const auto& f : rep.per_frame)
        if (f.l2)
            errs.push_back(*f.l2);
    std::sort(errs.begin(), errs.end());
    const double n = static_cast<double>(std::max<std::size_t>(truth.size(), 1));
    for (int e = 0; e <= kCurveMaxPx; ++e) {
        const auto hits = std::upper_bound(errs.begin(), errs.end(), static_cast<double>(e)) - errs.begin();
        rep.curve[static_cast<std::size_t>(e)] = truth.empty() ? 0.0 : static_cast<double>(hits) / n;
    }
    rep.rate_at_5px = rep.curve[5];
    rep.rate_at_10px = rep.curve[10];
    if (rep.n_detected > 0)
        rep.mean_error_over_detected = err_sum / static_cast<double>(rep.n_detected);
    return rep;
}

EvalReport evaluate(const AnnotatedSet& set, const DetectionParams& params)
{
    params.validate();
    if (set.frames.empty())
        throw InvalidArgument("evaluate: annotated set has no labeled frames");
    if (params.roi && !params.roi->fits(set.resolution.width, set.resolution.height))
        throw ConfigError(fmt::format("evaluate: ROI ({},{},{},{}) does not fit {}x{} frames", params.roi->x,
                                      params.roi->y, params.roi->w, params.roi->h, set.resolution.width,
                                      set.resolution.height));

    std::vector<std::optional<Point2d>> detected;
    detected.reserve(set.frames.size());
    for (std::size_t i = 0; i < set.frames.size(); ++i) {
        const GrayImage img = read_image(set.frames[i]);
        if (img.width() != set.resolution.width || img.height() != set.resolution.height)
            throw FormatError(fmt::format("{}: resolution {}x{} differs from the set's {}x{}",
                                          set.frames[i].string(), img.width(), img.height(),
                                          set.resolution.width, set.resolution.height));
        const DetectionResult res = detect(img, params);
        detected.push_back(res.pupil ? std::optional<Point2d>(res.pupil->center) : std::nullopt);
    }
    EvalReport rep = build_report(set.truth, detected);
    rep.n_unlabeled = set.unlabeled.size();
    return rep;
}

MacroSummary macro_average(std::span<const EvalReport> reports)
{
    MacroSummary m;
    m.n_sets = reports.size();
    if (reports.empty())
        return m;
    double err = 0.0;
    std::size_t with_err = 0;
    for (const auto& r : reports) {
        m.rate_at_5px += r.rate_at_5px;
        m.rate_at_10px += r.rate_at_10px;
        if (r.mean_error_over_detected) {
            err += *r.mean_error_over_detected;
            ++with_err;
        }
    }
    m.rate_at_5px /= static_cast<double>(reports.size());
    m.rate_at_10px /= static_cast<double>(reports.size());
    if (with_err > 0)
        m.mean_error_over_detected = err / static_cast<double>(with_err);
    return m;
}

std::string report_to_json(const EvalReport& report)
{
    using nlohmann::json;
    json frames = json::array();
    for (const auto& f : report.per_frame) {
        frames.push_back({{"index", f.index},
                          {"truth", {f.truth.x, f.truth.y}},
                          {"detected", f.detected ? json{f.detected->x, f.detected->y} : json(nullptr)},
                          {"l2", f.l2 ? json(*f.l2) : json(nullptr)}});
    }
    json curve = json::array();
    for (int e = 0; e <= kCurveMaxPx; ++e)
        curve.push_back({{"e_px", e}, {"rate", report.curve[static_cast<std::size_t>(e)]}});
    json doc{{"n_frames", report.per_frame.size()},
             {"n_detected", report.n_detected},
             {"n_unlabeled", report.n_unlabeled},
             {"rate_at_5px", report.rate_at_5px},
             {"rate_at_10px", report.rate_at_10px},
             {"mean_error_over_detected",
              report.mean_error_over_detected ? json(*report.mean_error_over_detected) : json(nullptr)},
             {"curve", curve},
             {"per_frame", frames}};
    return doc.dump(2) + "\n";
}

void write_curve_csv(std::ostream& out, const EvalReport& report)
{
    out << "e_px,rate\n";
    for (int e = 0; e <= kCurveMaxPx; ++e)
        out << fmt::format("{},{}\n", e, report.curve[static_cast<std::size_t>(e)]);
}

}  // namespace edgepupil
