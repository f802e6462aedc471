#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "edgepupil/pipeline.hpp"

namespace edgepupil {

// L = N_c + A_min + C for one frame. N_c is a count and A_min an area in
// px^2; they are summed as-is.
struct LossBreakdown {
    std::size_t n_contours = 0;
    double a_min = 0.0;
    double penalty = 0.0;
    double total = 0.0;

    friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct LossRecord {
    double t_canny = 0.0;
    int k_blur = 0;
    double mean_loss = 0.0;
    std::vector<LossBreakdown> frame_losses;
};

// Penalty C charged when a frame produces no contours at all. The same at
// every resolution unless overridden.
inline constexpr double kDefaultPenalty = 1000.0;

struct LossOptions {
    std::optional<double> penalty;  // replaces kDefaultPenalty
};

// Runs the pipeline with (t_canny, k_blur) replacing the values in `base`.
//  - no contours: (0, 0, C, C)
//  - a pupil was selected and fitted: A_min = |hull area - ellipse area|
//  - otherwise: the smallest |hull area - ellipse area| over all contours
//    with at least five points that admit an ellipse fit; if none does,
//    A_min = C so the cell still scores worse than any fitted one.
LossBreakdown frame_loss(const GrayImage& frame, double t_canny, int k_blur, const DetectionParams& base,
                         const LossOptions& opts = {});

// Loss of one (t, k) cell averaged over frames.
LossRecord evaluate_cell(std::span<const GrayImage> frames, double t_canny, int k_blur,
                         const DetectionParams& base, const LossOptions& opts = {});

// One record per (t, k) pair, sorted ascending by mean loss; ties go to the
// smaller t, then the smaller k. Throws InvalidArgument on empty inputs,
// even kernels, or duplicate grid values.
std::vector<LossRecord> grid_search(std::span<const GrayImage> frames, std::span<const double> t_values,
                                    std::span<const int> k_values, const DetectionParams& base,
                                    const LossOptions& opts = {});

// Loads every frame in `dir` first; unreadable frames fail with their path.
std::vector<LossRecord> grid_search(const std::filesystem::path& dir, std::span<const double> t_values,
                                    std::span<const int> k_values, const DetectionParams& base,
                                    const LossOptions& opts = {});

// CSV with header `t_canny,k_blur,mean_loss,n_frames`.
void write_loss_csv(std::ostream& out, std::span<const LossRecord> records);
// One JSON object per (cell, frame).
void write_loss_jsonl(std::ostream& out, std::span<const LossRecord> records);

}  // namespace edgepupil
