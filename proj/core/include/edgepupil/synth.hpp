#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "edgepupil/eval.hpp"
#include "edgepupil/geometry.hpp"
#include "edgepupil/raster.hpp"

namespace edgepupil {

// Synthetic near-eye frames with exact ground truth.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Uniform and normal variates are derived here (53-bit
// mantissa fill and Box-Muller) rather than through <random>'s
// distributions, which are implementation-defined. Frames are therefore
// byte-identical across compilers and platforms for a given seed.

struct SynthEllipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.0;  // semi-axis along theta
    double b = 0.0;
    double theta = 0.0;
};

struct SynthReflection {
    double x = 0.0;
    double y = 0.0;
    double r = 0.0;
    std::uint8_t intensity = 255;
};

struct SynthScene {
    int width = 640;
    int height = 480;
    SynthEllipse pupil{320.0, 240.0, 22.0, 22.0, 0.0};
    double iris_radius = 0.0;  // 0 = 2.5 x the larger pupil semi-axis
    std::uint8_t pupil_intensity = 30;
    std::uint8_t iris_intensity = 110;
    std::uint8_t sclera_intensity = 200;
    double noise_sigma = 0.0;
    std::optional<SynthReflection> reflection;
    // Share of the pupil area hidden under an eyelid band that covers the
    // frame from the top edge down.
    double occlusion_fraction = 0.0;
    std::uint64_t seed = 0;

    // Throws InvalidArgument.
    void validate() const;
};

struct RenderedFrame {
    GrayImage image;
    Point2d truth;
};

// Layers: sclera field, iris disc, pupil ellipse, reflection, eyelid band,
// then clamped additive Gaussian noise.
RenderedFrame render(const SynthScene& scene);

// Row index (pixel centres at integer y) of the lowest eyelid row, or
// nullopt when the band is empty.
std::optional<double> eyelid_cut(const SynthScene& scene);

// Parameter distribution of a generated session. Each frame draws pupil
// area, axis ratio, orientation and centre uniformly from the given ranges.
struct SessionSpec {
    int width = 640;
    int height = 480;
    std::size_t count = 150;
    std::uint64_t seed = 1;
    double pupil_area_min = 1100.0;  // px^2
    double pupil_area_max = 1900.0;
    double axis_ratio_min = 0.8;     // b / a
    double axis_ratio_max = 1.0;
    double center_margin = 80.0;     // px kept free around the centre range
    double iris_scale = 2.5;
    std::uint8_t pupil_intensity = 30;
    std::uint8_t iris_intensity = 110;
    std::uint8_t sclera_intensity = 200;
    double noise_sigma = 8.0;
    double reflection_probability = 0.0;
    double reflection_radius = 4.0;
    double occlusion_min = 0.0;
    double occlusion_max = 0.0;
    // Frames rendered fully occluded and written with empty labels.
    double closed_eye_probability = 0.0;

    void validate() const;
};

// Strict JSON (unknown keys rejected; every key optional over the defaults).
SessionSpec session_spec_from_json(std::string_view text);
SessionSpec load_session_spec(const std::filesystem::path& path);

// The scene of frame `index`; a pure function of (spec, index).
SynthScene session_scene(const SessionSpec& spec, std::size_t index, bool* closed_eye = nullptr);

// Writes `NNNNN.pgm` frames and labels.csv (marker_session layout) into
// out_dir, creating it if needed, and returns the set as eval would load it.
AnnotatedSet make_session(const SessionSpec& spec, const std::filesystem::path& out_dir);

}  // namespace edgepupil
