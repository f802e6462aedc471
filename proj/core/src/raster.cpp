#include "edgepupil/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "edgepupil/error.hpp"

namespace edgepupil {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
{
    if (width <= 0 || height <= 0)
        throw InvalidArgument("GrayImage: dimensions must be positive, got " + std::to_string(width) + "x" +
                              std::to_string(height));
    width_ = width;
    height_ = height;
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
{
    if (width <= 0 || height <= 0)
        throw InvalidArgument("GrayImage: dimensions must be positive");
    if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw InvalidArgument("GrayImage: data length " + std::to_string(data.size()) + " != " +
                              std::to_string(width) + "x" + std::to_string(height));
    width_ = width;
    height_ = height;
    data_ = std::move(data);
}

GrayImage to_grayscale(const RgbImage& rgb)
{
    if (rgb.width <= 0 || rgb.height <= 0)
        throw InvalidArgument("to_grayscale: dimensions must be positive");
    const auto n = static_cast<std::size_t>(rgb.width) * static_cast<std::size_t>(rgb.height);
    if (rgb.data.size() != 3 * n)
        throw InvalidArgument("to_grayscale: expected " + std::to_string(3 * n) + " bytes of RGB data, got " +
                              std::to_string(rgb.data.size()));

    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = 0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] + 0.114 * rgb.data[3 * i + 2];
        out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
    }
    return GrayImage(rgb.width, rgb.height, std::move(out));
}

namespace {

void check_roi(const RoiRect& roi, int width, int height)
{
    if (!roi.fits(width, height))
        throw BoundsError("crop: ROI (" + std::to_string(roi.x) + "," + std::to_string(roi.y) + "," +
                          std::to_string(roi.w) + "," + std::to_string(roi.h) + ") does not fit " +
                          std::to_string(width) + "x" + std::to_string(height) + " image");
}

}  // namespace

GrayImage crop(const GrayImage& img, const RoiRect& roi)
{
    check_roi(roi, img.width(), img.height());
    GrayImage out(roi.w, roi.h);
    for (int j = 0; j < roi.h; ++j) {
        auto src = img.row(roi.y + j).subspan(static_cast<std::size_t>(roi.x), static_cast<std::size_t>(roi.w));
        std::copy(src.begin(), src.end(), out.pixels().begin() + static_cast<std::ptrdiff_t>(j) * roi.w);
    }
    return out;
}

RgbImage crop(const RgbImage& img, const RoiRect& roi)
{
    check_roi(roi, img.width, img.height);
    RgbImage out{roi.w, roi.h, std::vector<std::uint8_t>(3 * static_cast<std::size_t>(roi.w) * roi.h)};
    for (int j = 0; j < roi.h; ++j) {
        const auto src = img.data.begin() + 3 * (static_cast<std::ptrdiff_t>(roi.y + j) * img.width + roi.x);
        std::copy(src, src + 3 * roi.w, out.data.begin() + 3 * static_cast<std::ptrdiff_t>(j) * roi.w);
    }
    return out;
}

// Huang's sliding-histogram median. Each output row keeps a 256-bin
// histogram of the window plus the current median and the number of window
// pixels strictly below it, so a one-column slide costs O(k).
GrayImage median_blur(const GrayImage& img, int k)
{
    if (img.empty())
        throw InvalidArgument("median_blur: empty image");
    if (k < 1 || k % 2 == 0)
        throw InvalidArgument("median_blur: kernel size must be odd and >= 1, got " + std::to_string(k));
    if (k > std::min(img.width(), img.height()))
        throw InvalidArgument("median_blur: kernel size " + std::to_string(k) + " exceeds image extent");
    if (k == 1)
        return img;

    const int w = img.width();
    const int h = img.height();
    const int r = k / 2;
    const int pw = w + 2 * r;
    const int ph = h + 2 * r;

    // Edge-replicated copy so the window never needs bounds checks.
    std::vector<std::uint8_t> padded(static_cast<std::size_t>(pw) * ph);
    for (int py = 0; py < ph; ++py) {
        const auto src = img.row(std::clamp(py - r, 0, h - 1));
        std::uint8_t* dst = padded.data() + static_cast<std::size_t>(py) * pw;
        std::fill(dst, dst + r, src.front());
        std::copy(src.begin(), src.end(), dst + r);
        std::fill(dst + r + w, dst + pw, src.back());
    }

    const int rank = (k * k - 1) / 2;
    GrayImage out(w, h);
    std::array<int, 256> hist{};

    for (int y = 0; y < h; ++y) {
        hist.fill(0);
        const std::uint8_t* top = padded.data() + static_cast<std::size_t>(y) * pw;
        for (int dy = 0; dy < k; ++dy)
            for (int dx = 0; dx < k; ++dx)
                ++hist[top[static_cast<std::size_t>(dy) * pw + dx]];

        int med = 0;
        int below = 0;
        while (below + hist[med] <= rank)
            below += hist[med++];
        out(0, y) = static_cast<std::uint8_t>(med);

        for (int x = 1; x < w; ++x) {
            const std::uint8_t* leaving = top + (x - 1);
            const std::uint8_t* entering = top + (x + k - 1);
            for (int dy = 0; dy < k; ++dy) {
                const std::uint8_t out_v = leaving[static_cast<std::size_t>(dy) * pw];
                const std::uint8_t in_v = entering[static_cast<std::size_t>(dy) * pw];
                --hist[out_v];
                ++hist[in_v];
                below += (in_v < med) - (out_v < med);
            }
            while (below > rank)
                below -= hist[--med];
            while (below + hist[med] <= rank)
                below += hist[med++];
            out(x, y) = static_cast<std::uint8_t>(med);
        }
    }
    return out;
}

namespace {

template <typename Pick>
void axis_extreme(const GrayImage& src, GrayImage& dst, int r, bool horizontal, Pick pick)
{
    const int w = src.width();
    const int h = src.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = src(x, y);
            if (horizontal) {
                for (int i = std::max(0, x - r); i <= std::min(w - 1, x + r); ++i)
                    v = pick(v, src(i, y));
            } else {
                for (int j = std::max(0, y - r); j <= std::min(h - 1, y + r); ++j)
                    v = pick(v, src(x, j));
            }
            dst(x, y) = v;
        }
    }
}

template <typename Pick>
GrayImage rank_filter(const GrayImage& img, const StructuringElement& se, Pick pick)
{
    if (img.empty())
        throw InvalidArgument("morphology: empty image");
    if (se.radius < 1)
        throw InvalidArgument("morphology: structuring element radius must be >= 1");
    if (2 * se.radius + 1 > std::min(img.width(), img.height()))
        throw InvalidArgument("morphology: structuring element does not fit in image");

    GrayImage horiz(img.width(), img.height());
    axis_extreme(img, horiz, se.radius, true, pick);
    GrayImage out(img.width(), img.height());
    if (se.shape == SeShape::square) {
        // Square footprint is separable.
        axis_extreme(horiz, out, se.radius, false, pick);
    } else {
        axis_extreme(img, out, se.radius, false, pick);
        auto a = horiz.pixels();
        auto b = out.pixels();
        for (std::size_t i = 0; i < b.size(); ++i)
            b[i] = pick(a[i], b[i]);
    }
    return out;
}

}  // namespace

GrayImage erode(const GrayImage& img, const StructuringElement& se)
{
    return rank_filter(img, se, [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

GrayImage dilate(const GrayImage& img, const StructuringElement& se)
{
    return rank_filter(img, se, [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

GrayImage morph_open(const GrayImage& img, const StructuringElement& se)
{
    return dilate(erode(img, se), se);
}

}  // namespace edgepupil
