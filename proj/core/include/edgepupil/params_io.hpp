#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "edgepupil/pipeline.hpp"

namespace edgepupil {

// JSON form of DetectionParams:
//
//   {
//     "t_canny": 24, "k_blur": 23,
//     "min_pupil_area": 1000, "max_pupil_area": 2000,
//     "t_circularity": 0.6,
//     "roi": null | {"x": 0, "y": 0, "w": 640, "h": 480},
//     "morph_enabled": true,
//     "morph_se": {"shape": "cross" | "square", "radius": 1},
//     "morph_placement": "pre_edge" | "post_edge"
//   }
//
// The first four keys are required. Unknown keys are rejected. Parsing
// failures throw ConfigError; the result is validated.
DetectionParams params_from_json(std::string_view text);
std::string params_to_json(const DetectionParams& params);

DetectionParams load_params(const std::filesystem::path& path);
void save_params(const std::filesystem::path& path, const DetectionParams& params);

}  // namespace edgepupil
