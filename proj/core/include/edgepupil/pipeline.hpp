#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "edgepupil/geometry.hpp"
#include "edgepupil/raster.hpp"

namespace edgepupil {

// Where the morphological opening runs. Before edge detection it acts on the
// blurred grayscale frame; after, on the binary edge raster (which removes
// every edge thinner than the element).
enum class MorphPlacement { pre_edge, post_edge };

struct DetectionParams {
    double t_canny = 24.0;
    int k_blur = 23;
    double min_pupil_area = 1000.0;  // px^2, convex hull area
    double max_pupil_area = 2000.0;  // px^2
    double t_circularity = 0.6;
    std::optional<RoiRect> roi;      // full frame when absent
    bool morph_enabled = true;
    StructuringElement morph_se{SeShape::cross, 1};
    MorphPlacement morph_placement = MorphPlacement::pre_edge;

    // Throws ConfigError naming the offending field.
    void validate() const;

    // Settings used for the 480x640 and 240x320 timing runs.
    static DetectionParams high_res();
    static DetectionParams low_res();

    friend bool operator==(const DetectionParams&, const DetectionParams&) = default;
};

enum class Stage : std::uint8_t { crop, grayscale, blur, morph, canny, contours, filtering, ellipse_fit, total };
inline constexpr std::size_t kStageCount = 9;
inline constexpr std::array<Stage, kStageCount> kAllStages{Stage::crop,     Stage::grayscale, Stage::blur,
                                                           Stage::morph,    Stage::canny,     Stage::contours,
                                                           Stage::filtering, Stage::ellipse_fit, Stage::total};

std::string_view stage_name(Stage s) noexcept;

// Durations of the stages that actually ran; absent entries were skipped.
struct StageTimings {
    std::array<std::optional<std::chrono::nanoseconds>, kStageCount> ns{};

    std::optional<std::chrono::nanoseconds> operator[](Stage s) const noexcept
    {
        return ns[static_cast<std::size_t>(s)];
    }
    void record(Stage s, std::chrono::nanoseconds d) noexcept { ns[static_cast<std::size_t>(s)] = d; }
};

struct PupilCandidate {
    std::size_t contour_index = 0;
    HullMetrics hull;
    bool passed_area = false;
    bool passed_circularity = false;

    bool passed() const noexcept { return passed_area && passed_circularity; }
};

struct Pupil {
    Point2d center;                     // frame coordinates
    std::optional<EllipseFit> ellipse;  // frame coordinates; absent when the fit degenerated
    Point2d hull_centroid;              // frame coordinates
    std::size_t candidate_index = 0;    // index into DetectionResult::candidates
};

// Contours and candidate hulls are in ROI coordinates; the pupil is reported
// in full-frame coordinates.
struct DetectionResult {
    std::optional<Pupil> pupil;
    std::size_t n_contours = 0;
    std::vector<Contour> contours;
    std::vector<PupilCandidate> candidates;  // one per contour, same order
    StageTimings timings;
    Point2i roi_offset;
};

// Runs the full pipeline. A frame without a pupil is a normal result.
// Throws ConfigError for invalid params and InvalidArgument / BoundsError
// for frames that cannot be processed.
DetectionResult detect(const GrayImage& frame, const DetectionParams& params);
DetectionResult detect(const RgbImage& frame, const DetectionParams& params);

// Candidate selection: among candidates passing both filters, highest
// circularity, then larger hull area, then lowest index.
std::optional<std::size_t> select_candidate(std::span<const PupilCandidate> candidates);

// Same as mapping detect over the frames in order. All frames must share one
// resolution. Errors carry the failing frame index.
std::vector<DetectionResult> detect_batch(std::span<const GrayImage> frames, const DetectionParams& params);
std::vector<DetectionResult> detect_batch(std::span<const std::filesystem::path> frames,
                                          const DetectionParams& params);

}  // namespace edgepupil
