#include "edgepupil/edges.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "edgepupil/error.hpp"

namespace edgepupil {

EdgeMap::EdgeMap(int width, int height) : width_(width), height_(height)
{
    if (width <= 0 || height <= 0)
        throw InvalidArgument("EdgeMap: dimensions must be positive");
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t EdgeMap::count() const noexcept
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

GrayImage EdgeMap::to_image() const
{
    std::vector<std::uint8_t> px(bits_.size());
    std::transform(bits_.begin(), bits_.end(), px.begin(), [](std::uint8_t b) { return b ? 255 : 0; });
    return GrayImage(width_, height_, std::move(px));
}

EdgeMap EdgeMap::from_image(const GrayImage& img)
{
    EdgeMap map(img.width(), img.height());
    auto src = img.pixels();
    std::transform(src.begin(), src.end(), map.bits_.begin(), [](std::uint8_t v) { return v ? 1 : 0; });
    return map;
}

CannyConfig CannyConfig::from_threshold(double t_canny, double low_ratio)
{
    return {t_canny, t_canny * low_ratio};
}

Gradient sobel(const GrayImage& img)
{
    const int w = img.width();
    const int h = img.height();
    Gradient g{w, h, {}, {}, {}};
    const auto n = img.size();
    g.gx.resize(n);
    g.gy.resize(n);
    g.magnitude.resize(n);

    for (int y = 0; y < h; ++y) {
        const auto up = img.row(std::max(y - 1, 0));
        const auto mid = img.row(y);
        const auto down = img.row(std::min(y + 1, h - 1));
        for (int x = 0; x < w; ++x) {
            const int xl = std::max(x - 1, 0);
            const int xr = std::min(x + 1, w - 1);
            const int gx = (up[xr] + 2 * mid[xr] + down[xr]) - (up[xl] + 2 * mid[xl] + down[xl]);
            const int gy = (down[xl] + 2 * down[x] + down[xr]) - (up[xl] + 2 * up[x] + up[xr]);
            const auto i = static_cast<std::size_t>(y) * w + x;
            g.gx[i] = gx;
            g.gy[i] = gy;
            g.magnitude[i] = static_cast<float>(std::sqrt(static_cast<double>(gx * gx + gy * gy)));
        }
    }
    return g;
}

EdgeMap canny(const GrayImage& img, const CannyConfig& cfg)
{
    if (img.width() < 3 || img.height() < 3)
        throw InvalidArgument("canny: image must be at least 3x3, got " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()));
    if (!cfg.valid())
        throw InvalidArgument("canny: thresholds must satisfy 0 < t_low <= t_high");

    const int w = img.width();
    const int h = img.height();
    const Gradient g = sobel(img);
    const auto mag = [&](int x, int y) -> float {
        if (x < 0 || y < 0 || x >= w || y >= h)
            return 0.0f;
        return g.magnitude[static_cast<std::size_t>(y) * w + x];
    };

    // tan(22.5 deg) and tan(67.5 deg) for direction binning without atan2.
    constexpr double tan22 = 0.41421356237309503;
    constexpr double tan67 = 2.414213562373095;

    // 0 = suppressed, 1 = weak, 2 = strong.
    std::vector<std::uint8_t> cls(img.size(), 0);
    std::vector<std::size_t> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y) * w + x;
            const float m = g.magnitude[i];
            if (m < cfg.t_low)
                continue;
            const double ax = std::abs(g.gx[i]);
            const double ay = std::abs(g.gy[i]);
            // Neighbours along the gradient: the "behind" one must be
            // strictly smaller, the "ahead" one no larger. The asymmetry
            // keeps exactly one pixel of a two-pixel plateau.
            float behind, ahead;
            if (ay <= tan22 * ax) {
                behind = mag(x - 1, y);
                ahead = mag(x + 1, y);
            } else if (ay >= tan67 * ax) {
                behind = mag(x, y - 1);
                ahead = mag(x, y + 1);
            } else if ((g.gx[i] > 0) == (g.gy[i] > 0)) {
                behind = mag(x - 1, y - 1);
                ahead = mag(x + 1, y + 1);
            } else {
                behind = mag(x + 1, y - 1);
                ahead = mag(x - 1, y + 1);
            }
            if (!(m > behind && m >= ahead))
                continue;
            if (m >= cfg.t_high) {
                cls[i] = 2;
                stack.push_back(i);
            } else {
                cls[i] = 1;
            }
        }
    }

    // Flood fill from every strong seed through weak pixels.
    EdgeMap out(w, h);
    for (std::size_t i : stack)
        out.set(static_cast<int>(i % w), static_cast<int>(i / w));
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % w);
        const int y = static_cast<int>(i / w);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                    continue;
                const auto j = static_cast<std::size_t>(ny) * w + nx;
                if (cls[j] == 1) {
                    cls[j] = 2;
                    out.set(nx, ny);
                    stack.push_back(j);
                }
            }
        }
    }
    return out;
}

}  // namespace edgepupil
