#pragma once

#include <cstdint>
#include <vector>

#include "edgepupil/raster.hpp"

namespace edgepupil {

// Binary edge raster, same layout as GrayImage.
class EdgeMap {
public:
    EdgeMap() = default;
    EdgeMap(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool operator()(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool on = true) noexcept { bits_[index(x, y)] = on ? 1 : 0; }

    std::size_t count() const noexcept;

    // 0/255 raster for debug dumps.
    GrayImage to_image() const;
    // Nonzero pixels become edges.
    static EdgeMap from_image(const GrayImage& img);

    friend bool operator==(const EdgeMap&, const EdgeMap&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Hysteresis thresholds on the L2 magnitude of the 3x3 Sobel gradient.
struct CannyConfig {
    double t_high = 0.0;
    double t_low = 0.0;

    // The pipeline exposes a single knob; the low threshold follows at
    // `low_ratio` of it.
    static CannyConfig from_threshold(double t_canny, double low_ratio = 0.5);

    bool valid() const noexcept { return t_low > 0.0 && t_low <= t_high; }
};

// Per-pixel Sobel response. gx/gy are exact integers; magnitude is
// sqrt(gx^2 + gy^2). Borders use edge replication.
struct Gradient {
    int width = 0;
    int height = 0;
    std::vector<int> gx;
    std::vector<int> gy;
    std::vector<float> magnitude;
};

Gradient sobel(const GrayImage& img);

// Sobel -> 4-direction non-maximum suppression -> 8-connected hysteresis.
// No smoothing is applied here. Throws InvalidArgument for images smaller
// than 3x3 or an invalid config.
EdgeMap canny(const GrayImage& img, const CannyConfig& cfg);

}  // namespace edgepupil
