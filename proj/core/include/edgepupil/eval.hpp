#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgepupil/geometry.hpp"
#include "edgepupil/image_io.hpp"
#include "edgepupil/pipeline.hpp"

namespace edgepupil {

// On-disk layouts understood by load_annotated_set.
//
// lpw_frames: numbered frames `NNNNN.png|pgm` in the directory plus an
// annotation file with one whitespace-separated `x y` per line in frame
// order. The annotation file is `<dir>.txt` next to the directory (the LPW
// convention of `1.avi` + `1.txt`), or else the only `*.txt` inside it.
//
// marker_session / free_movement_session: frames plus `labels.csv` with the
// header `frame,x,y`. `frame` is the image file name. Rows with empty x and
// y mark unlabeled frames (closed eyes); they are kept out of the error
// statistics and only counted.
enum class Layout { lpw_frames, marker_session, free_movement_session };

Layout parse_layout(std::string_view name);
std::string_view layout_name(Layout layout) noexcept;

struct AnnotatedSet {
    std::vector<std::filesystem::path> frames;
    std::vector<Point2d> truth;  // aligned with frames
    ImageSize resolution;
    std::vector<std::filesystem::path> unlabeled;

    std::size_t size() const noexcept { return frames.size(); }
};

AnnotatedSet load_annotated_set(const std::filesystem::path& root, Layout layout);

struct FrameError {
    std::size_t index = 0;
    std::optional<Point2d> detected;
    Point2d truth;
    std::optional<double> l2;  // absent for a miss
};

inline constexpr int kCurveMaxPx = 20;

struct EvalReport {
    std::vector<FrameError> per_frame;
    // curve[e] = fraction of all frames with l2 <= e px, e = 0..20.
    std::array<double, kCurveMaxPx + 1> curve{};
    double rate_at_5px = 0.0;
    double rate_at_10px = 0.0;
    std::optional<double> mean_error_over_detected;
    std::size_t n_detected = 0;
    std::size_t n_unlabeled = 0;
};

// Fraction of all frames whose error is at most `e_px`. Misses count in the
// denominator only.
double detection_rate(std::span<const FrameError> per_frame, double e_px) noexcept;

// Report math on already-computed detections (aligned with truth).
EvalReport build_report(std::span<const Point2d> truth, std::span<const std::optional<Point2d>> detected);

// Detects every frame and scores it against the set's truth.
EvalReport evaluate(const AnnotatedSet& set, const DetectionParams& params);

struct MacroSummary {
    std::size_t n_sets = 0;
    double rate_at_5px = 0.0;
    double rate_at_10px = 0.0;
    std::optional<double> mean_error_over_detected;  // mean of the per-set means that exist
};

// Unweighted average over sets.
MacroSummary macro_average(std::span<const EvalReport> reports);

std::string report_to_json(const EvalReport& report);
// `e_px,rate` rows for e = 0..20.
void write_curve_csv(std::ostream& out, const EvalReport& report);

}  // namespace edgepupil
