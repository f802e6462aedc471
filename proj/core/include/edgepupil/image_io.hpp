#pragma once

#include <filesystem>
#include <vector>

#include "edgepupil/raster.hpp"

namespace edgepupil {

struct ImageSize {
    int width = 0;
    int height = 0;
    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Reads an 8-bit binary PGM (P5) or an 8-bit PNG. RGB(A) PNGs go through
// to_grayscale; alpha is dropped. Throws IoError / FormatError.
GrayImage read_image(const std::filesystem::path& path);

// Dimensions from the file header only.
ImageSize read_image_size(const std::filesystem::path& path);

GrayImage read_pgm(const std::filesystem::path& path);
GrayImage read_png(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const GrayImage& img);

// *.png and *.pgm files directly inside `dir`, sorted by file name.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

}  // namespace edgepupil
