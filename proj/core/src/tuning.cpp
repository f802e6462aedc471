#include "edgepupil/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "edgepupil/error.hpp"
#include "edgepupil/image_io.hpp"

namespace edgepupil {

LossBreakdown frame_loss(const GrayImage& frame, double t_canny, int k_blur, const DetectionParams& base,
                         const LossOptions& opts)
{
    DetectionParams params = base;
    params.t_canny = t_canny;
    params.k_blur = k_blur;
    const double c = opts.penalty.value_or(kDefaultPenalty);

    const DetectionResult res = detect(frame, params);
    LossBreakdown loss;
    loss.n_contours = res.n_contours;
    if (res.n_contours == 0) {
        loss.penalty = c;
        loss.total = c;
        return loss;
    }

    if (res.pupil && res.pupil->ellipse) {
        const auto& hull = res.candidates[res.pupil->candidate_index].hull;
        loss.a_min = std::abs(hull.area - res.pupil->ellipse->area());
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < res.contours.size(); ++i) {
            if (res.contours[i].points.size() < 5)
                continue;
            try {
                const EllipseFit fit = fit_ellipse(res.contours[i]);
                best = std::min(best, std::abs(res.candidates[i].hull.area - fit.area()));
            } catch (const FitDegenerate&) {
            }
        }
        loss.a_min = std::isfinite(best) ? best : c;
    }
    loss.total = static_cast<double>(loss.n_contours) + loss.a_min + loss.penalty;
    return loss;
}

LossRecord evaluate_cell(std::span<const GrayImage> frames, double t_canny, int k_blur,
                         const DetectionParams& base, const LossOptions& opts)
{
    if (frames.empty())
        throw InvalidArgument("evaluate_cell: no frames");
    LossRecord rec;
    rec.t_canny = t_canny;
    rec.k_blur = k_blur;
    rec.frame_losses.reserve(frames.size());
    double sum = 0.0;
    for (const auto& f : frames) {
        rec.frame_losses.push_back(frame_loss(f, t_canny, k_blur, base, opts));
        sum += rec.frame_losses.back().total;
    }
    rec.mean_loss = sum / static_cast<double>(frames.size());
    return rec;
}

std::vector<LossRecord> grid_search(std::span<const GrayImage> frames, std::span<const double> t_values,
                                    std::span<const int> k_values, const DetectionParams& base,
                                    const LossOptions& opts)
{
    if (frames.empty())
        throw InvalidArgument("grid_search: no frames");
    if (t_values.empty() || k_values.empty())
        throw InvalidArgument("grid_search: empty threshold or kernel list");
    for (int k : k_values) {
        if (k < 1 || k % 2 == 0)
            throw InvalidArgument("grid_search: kernel sizes must be odd and >= 1, got " + std::to_string(k));
    }
    if (std::set<double>(t_values.begin(), t_values.end()).size() != t_values.size() ||
        std::set<int>(k_values.begin(), k_values.end()).size() != k_values.size())
        throw InvalidArgument("grid_search: duplicate grid values");

    std::vector<LossRecord> records;
    records.reserve(t_values.size() * k_values.size());
    for (double t : t_values)
        for (int k : k_values)
            records.push_back(evaluate_cell(frames, t, k, base, opts));

    std::sort(records.begin(), records.end(), [](const LossRecord& a, const LossRecord& b) {
        if (a.mean_loss != b.mean_loss)
            return a.mean_loss < b.mean_loss;
        if (a.t_canny != b.t_canny)
            return a.t_canny < b.t_canny;
        return a.k_blur < b.k_blur;
    });
    return records;
}

std::vector<LossRecord> grid_search(const std::filesystem::path& dir, std::span<const double> t_values,
                                    std::span<const int> k_values, const DetectionParams& base,
                                    const LossOptions& opts)
{
    const auto paths = list_frames(dir);
    if (paths.empty())
        throw InvalidArgument(dir.string() + ": no .png or .pgm frames");
    std::vector<GrayImage> frames;
    frames.reserve(paths.size());
    for (const auto& p : paths) {
        try {
            frames.push_back(read_image(p));
        } catch (const Error& e) {
            throw FormatError(std::string("unreadable frame: ") + e.what());
        }
    }
    return grid_search(std::span<const GrayImage>(frames), t_values, k_values, base, opts);
}

void write_loss_csv(std::ostream& out, std::span<const LossRecord> records)
{
    out << "t_canny,k_blur,mean_loss,n_frames\n";
    for (const auto& r : records)
        out << fmt::format("{},{},{},{}\n", r.t_canny, r.k_blur, r.mean_loss, r.frame_losses.size());
}

void write_loss_jsonl(std::ostream& out, std::span<const LossRecord> records)
{
    for (const auto& r : records) {
        for (std::size_t i = 0; i < r.frame_losses.size(); ++i) {
            const auto& l = r.frame_losses[i];
            nlohmann::json row{{"t_canny", r.t_canny}, {"k_blur", r.k_blur},   {"frame", i},
                               {"n_contours", l.n_contours}, {"a_min", l.a_min}, {"penalty", l.penalty},
                               {"total", l.total}};
            out << row.dump() << '\n';
        }
    }
}

}  // namespace edgepupil
