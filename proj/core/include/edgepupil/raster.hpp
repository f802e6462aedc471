#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace edgepupil {

// Row-major 8-bit intensity raster. Every pipeline stage consumes and
// produces one of these.
class GrayImage {
public:
    GrayImage() = default;
    // Zero-filled image. Throws InvalidArgument on a zero dimension.
    GrayImage(int width, int height, std::uint8_t fill = 0);
    // Takes ownership of `data`; its size must be width * height.
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    std::uint8_t operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    std::uint8_t& operator()(int x, int y) noexcept { return data_[index(x, y)]; }

    std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    std::span<std::uint8_t> pixels() noexcept { return data_; }
    std::span<const std::uint8_t> row(int y) const noexcept
    {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

// Interleaved 8-bit RGB raster, only used at ingestion.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // R,G,B per pixel, row-major
};

struct RoiRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    // True when the rectangle is non-empty and lies inside a width x height frame.
    bool fits(int width, int height) const noexcept
    {
        return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
    }

    friend bool operator==(const RoiRect&, const RoiRect&) = default;
};

enum class SeShape { cross, square };

struct StructuringElement {
    SeShape shape = SeShape::cross;
    int radius = 1;

    friend bool operator==(const StructuringElement&, const StructuringElement&) = default;
};

// BT.601 luma, rounded to nearest.
GrayImage to_grayscale(const RgbImage& rgb);

GrayImage crop(const GrayImage& img, const RoiRect& roi);
RgbImage crop(const RgbImage& img, const RoiRect& roi);

// k x k median with edge replication. k must be odd, >= 1 and <= min(w, h).
GrayImage median_blur(const GrayImage& img, int k);

// Grayscale erosion and dilation over the element footprint. Pixels outside
// the frame are ignored, which for these footprints is the same as edge
// replication.
GrayImage erode(const GrayImage& img, const StructuringElement& se);
GrayImage dilate(const GrayImage& img, const StructuringElement& se);

// Erosion followed by dilation. Removes bright structures thinner than the
// element.
GrayImage morph_open(const GrayImage& img, const StructuringElement& se);

}  // namespace edgepupil
