#include "edgepupil/pipeline.hpp"

#include <algorithm>
#include <string>

#include "edgepupil/edges.hpp"
#include "edgepupil/error.hpp"
#include "edgepupil/image_io.hpp"

namespace edgepupil {

namespace {

using Clock = std::chrono::steady_clock;

class StageClock {
public:
    explicit StageClock(StageTimings& timings) : timings_(timings), start_(Clock::now()) {}

    // Charges the time since the previous lap to `stage`.
    void lap(Stage stage)
    {
        const auto now = Clock::now();
        timings_.record(stage, std::chrono::duration_cast<std::chrono::nanoseconds>(now - start_));
        start_ = now;
    }

private:
    StageTimings& timings_;
    Clock::time_point start_;
};

DetectionResult run_from_gray(GrayImage gray, const DetectionParams& params, StageTimings timings,
                              Clock::time_point t0)
{
    DetectionResult result;
    result.timings = timings;
    if (params.roi)
        result.roi_offset = {params.roi->x, params.roi->y};
    if (gray.width() < 3 || gray.height() < 3)
        throw InvalidArgument("detect: frame must be at least 3x3 after cropping");
    if (params.k_blur > std::min(gray.width(), gray.height()))
        throw ConfigError("detect: k_blur " + std::to_string(params.k_blur) + " exceeds the cropped frame");

    StageClock clock(result.timings);
    GrayImage blurred = median_blur(gray, params.k_blur);
    clock.lap(Stage::blur);

    const bool morph_pre = params.morph_enabled && params.morph_placement == MorphPlacement::pre_edge;
    const bool morph_post = params.morph_enabled && params.morph_placement == MorphPlacement::post_edge;
    if (morph_pre) {
        blurred = morph_open(blurred, params.morph_se);
        clock.lap(Stage::morph);
    }

    EdgeMap edges = canny(blurred, CannyConfig::from_threshold(params.t_canny));
    clock.lap(Stage::canny);

    if (morph_post) {
        edges = EdgeMap::from_image(morph_open(edges.to_image(), params.morph_se));
        clock.lap(Stage::morph);
    }

    result.contours = extract_contours(edges);
    result.n_contours = result.contours.size();
    clock.lap(Stage::contours);

    result.candidates.reserve(result.contours.size());
    for (std::size_t i = 0; i < result.contours.size(); ++i) {
        PupilCandidate c;
        c.contour_index = i;
        c.hull = convex_hull(result.contours[i]);
        c.passed_area = c.hull.area >= params.min_pupil_area && c.hull.area <= params.max_pupil_area;
        c.passed_circularity = c.hull.circularity >= params.t_circularity;
        result.candidates.push_back(std::move(c));
    }
    const auto chosen = select_candidate(result.candidates);
    clock.lap(Stage::filtering);

    if (chosen) {
        const PupilCandidate& cand = result.candidates[*chosen];
        const double ox = result.roi_offset.x;
        const double oy = result.roi_offset.y;
        Pupil pupil;
        pupil.candidate_index = *chosen;
        const Point2d hc = centroid(cand.hull.vertices);
        pupil.hull_centroid = {hc.x + ox, hc.y + oy};
        try {
            EllipseFit fit = fit_ellipse(result.contours[cand.contour_index]);
            fit.cx += ox;
            fit.cy += oy;
            pupil.ellipse = fit;
            pupil.center = {fit.cx, fit.cy};
        } catch (const FitDegenerate&) {
            pupil.center = pupil.hull_centroid;
        }
        result.pupil = pupil;
    }
    clock.lap(Stage::ellipse_fit);

    result.timings.record(Stage::total, std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0));
    return result;
}

template <typename E>
[[noreturn]] void rethrow_with_index(const E& e, std::size_t index)
{
    throw E("frame " + std::to_string(index) + ": " + e.what());
}

template <typename Fn>
DetectionResult with_frame_index(std::size_t index, Fn&& fn)
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        rethrow_with_index(e, index);
    } catch (const BoundsError& e) {
        rethrow_with_index(e, index);
    } catch (const FormatError& e) {
        rethrow_with_index(e, index);
    } catch (const IoError& e) {
        rethrow_with_index(e, index);
    } catch (const InvalidArgument& e) {
        rethrow_with_index(e, index);
    }
}

}  // namespace

std::string_view stage_name(Stage s) noexcept
{
    switch (s) {
    case Stage::crop: return "crop";
    case Stage::grayscale: return "grayscale";
    case Stage::blur: return "blur";
    case Stage::morph: return "morph";
    case Stage::canny: return "canny";
    case Stage::contours: return "contours";
    case Stage::filtering: return "filtering";
    case Stage::ellipse_fit: return "ellipse_fit";
    case Stage::total: return "total";
    }
    return "unknown";
}

void DetectionParams::validate() const
{
    if (!(t_canny > 0.0))
        throw ConfigError("t_canny must be positive");
    if (k_blur < 1 || k_blur % 2 == 0)
        throw ConfigError("k_blur must be odd and >= 1, got " + std::to_string(k_blur));
    if (!(min_pupil_area > 0.0))
        throw ConfigError("min_pupil_area must be positive");
    if (!(min_pupil_area < max_pupil_area))
        throw ConfigError("min_pupil_area must be smaller than max_pupil_area");
    if (!(t_circularity >= 0.0 && t_circularity <= 1.0))
        throw ConfigError("t_circularity must lie in [0, 1]");
    if (roi && (roi->w <= 0 || roi->h <= 0 || roi->x < 0 || roi->y < 0))
        throw ConfigError("roi must have non-negative origin and positive extent");
    if (morph_se.radius < 1)
        throw ConfigError("morph_se.radius must be >= 1");
}

DetectionParams DetectionParams::high_res()
{
    DetectionParams p;
    p.t_canny = 24.0;
    p.k_blur = 23;
    p.min_pupil_area = 1000.0;
    p.max_pupil_area = 2000.0;
    return p;
}

DetectionParams DetectionParams::low_res()
{
    DetectionParams p;
    p.t_canny = 30.0;
    p.k_blur = 7;
    p.min_pupil_area = 100.0;
    p.max_pupil_area = 300.0;
    return p;
}

std::optional<std::size_t> select_candidate(std::span<const PupilCandidate> candidates)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (!c.passed())
            continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& b = candidates[*best];
        if (c.hull.circularity > b.hull.circularity ||
            (c.hull.circularity == b.hull.circularity && c.hull.area > b.hull.area))
            best = i;
    }
    return best;
}

DetectionResult detect(const GrayImage& frame, const DetectionParams& params)
{
    const auto t0 = Clock::now();
    params.validate();
    if (frame.empty())
        throw InvalidArgument("detect: empty frame");

    StageTimings timings;
    StageClock clock(timings);
    GrayImage work = params.roi ? crop(frame, *params.roi) : frame;
    clock.lap(Stage::crop);
    return run_from_gray(std::move(work), params, timings, t0);
}

DetectionResult detect(const RgbImage& frame, const DetectionParams& params)
{
    const auto t0 = Clock::now();
    params.validate();

    StageTimings timings;
    StageClock clock(timings);
    RgbImage work = params.roi ? crop(frame, *params.roi) : frame;
    clock.lap(Stage::crop);
    GrayImage gray = to_grayscale(work);
    clock.lap(Stage::grayscale);
    return run_from_gray(std::move(gray), params, timings, t0);
}

std::vector<DetectionResult> detect_batch(std::span<const GrayImage> frames, const DetectionParams& params)
{
    params.validate();
    std::vector<DetectionResult> results;
    results.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].width() != frames.front().width() || frames[i].height() != frames.front().height())
            throw InvalidArgument("frame " + std::to_string(i) + ": resolution differs from frame 0");
        results.push_back(with_frame_index(i, [&] { return detect(frames[i], params); }));
    }
    return results;
}

std::vector<DetectionResult> detect_batch(std::span<const std::filesystem::path> frames,
                                          const DetectionParams& params)
{
    params.validate();
    std::vector<DetectionResult> results;
    results.reserve(frames.size());
    int width = 0, height = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        results.push_back(with_frame_index(i, [&] {
            const GrayImage img = read_image(frames[i]);
            if (i == 0) {
                width = img.width();
                height = img.height();
            } else if (img.width() != width || img.height() != height) {
                throw InvalidArgument(frames[i].string() + ": resolution differs from frame 0");
            }
            return detect(img, params);
        }));
    }
    return results;
}

}  // namespace edgepupil
