// Prints one PASS / FAIL / SKIP line per acceptance criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "edgepupil/error.hpp"
#include "edgepupil/eval.hpp"
#include "edgepupil/params_io.hpp"
#include "edgepupil/profile.hpp"
#include "edgepupil/synth.hpp"
#include "edgepupil/tuning.hpp"
#include "oracles/reference_oracles.hpp"

namespace fs = std::filesystem;
using namespace edgepupil;

namespace {

int failures = 0;

void verdict(const std::string& name, bool pass, const std::string& detail)
{
    fmt::print("{:<5} {:<28} {}\n", pass ? "PASS" : "FAIL", name, detail);
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

void skip(const std::string& name, const std::string& why)
{
    fmt::print("{:<5} {:<28} {}\n", "SKIP", name, why);
}

void info(const std::string& text)
{
    fmt::print("      {}\n", text);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double dist(Point2d a, Point2d b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Frames {
    std::vector<GrayImage> images;
    std::vector<Point2d> truth;
};

Frames render_session(const SessionSpec& spec)
{
    Frames f;
    for (std::size_t i = 0; i < spec.count; ++i) {
        RenderedFrame r = render(session_scene(spec, i));
        f.images.push_back(std::move(r.image));
        f.truth.push_back(r.truth);
    }
    return f;
}

double rate_within(const Frames& f, const DetectionParams& p, double px)
{
    std::size_t hits = 0;
    for (std::size_t i = 0; i < f.images.size(); ++i) {
        const DetectionResult r = detect(f.images[i], p);
        if (r.pupil && dist(r.pupil->center, f.truth[i]) <= px)
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(f.images.size());
}

void oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto hull = oracle::check_hull_oracle(1000, 12, 0xC0FFEE);
    const auto median = oracle::check_median_oracle(200, 16, 3, 0xBEEF);
    const double secs = seconds_since(t0);
    const auto hull_ok = std::count_if(hull.begin(), hull.end(), [](const auto& r) { return r.pass; });
    const auto med_ok = std::count_if(median.begin(), median.end(), [](const auto& r) { return r.pass; });
    verdict("oracle-equivalence",
            hull_ok == 1000 && med_ok == 200 && secs < 10.0,
            fmt::format("hull {}/1000 exact, median {}/200 exact, {:.2f} s (need all, < 10 s)", hull_ok, med_ok,
                        secs));
}

void ellipse_recovery()
{
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> ua(15.0, 60.0), u01(0.0, 1.0), upos(100.0, 400.0);
    std::uniform_int_distribution<int> un(24, 96);
    int good = 0;
    double worst_center = 0.0, worst_axis = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double a = ua(rng);
        const double b = 10.0 + (a - 10.0) * u01(rng);
        const double theta = std::numbers::pi * u01(rng);
        const double cx = upos(rng), cy = upos(rng);
        const int n = un(rng);
        std::vector<Point2d> pts;
        for (int j = 0; j < n; ++j) {
            const double t = 2.0 * std::numbers::pi * j / n;
            const double u = a * std::cos(t), v = b * std::sin(t);
            pts.push_back({std::round(cx + u * std::cos(theta) - v * std::sin(theta)),
                           std::round(cy + u * std::sin(theta) + v * std::cos(theta))});
        }
        try {
            const EllipseFit f = fit_ellipse(pts);
            const double ce = std::hypot(f.cx - cx, f.cy - cy);
            const double ae = std::max(std::abs(f.a - a) / a, std::abs(f.b - b) / b);
            worst_center = std::max(worst_center, ce);
            worst_axis = std::max(worst_axis, ae);
            if (ce <= 0.5 && ae <= 0.02)
                ++good;
        } catch (const FitDegenerate&) {
        }
    }
    verdict("ellipse-recovery", good >= 99,
            fmt::format("{}/100 within 0.5 px centre and 2% axes (need >= 99); worst {:.3f} px, {:.2f}%", good,
                        worst_center, 100.0 * worst_axis));
}

void circularity_exactness()
{
    const std::vector<Point2d> square{{0, 0}, {3, 0}, {3, 3}, {0, 3}};
    const double sq = convex_hull(square).circularity;
    std::vector<Point2d> gon;
    for (int i = 0; i < 64; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 64;
        gon.push_back({50.0 * std::cos(t), 50.0 * std::sin(t)});
    }
    const double g64 = convex_hull(gon).circularity;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    bool collinear_zero = true;
    for (int i = 0; i < 200; ++i) {
        const Point2d p{u(rng), u(rng)}, d{std::round(u(rng)), std::round(u(rng))};
        std::vector<Point2d> line;
        for (int k = 0; k < 2 + i % 10; ++k)
            line.push_back({std::round(p.x) + k * d.x, std::round(p.y) + k * d.y});
        collinear_zero = collinear_zero && convex_hull(line).circularity == 0.0;
    }
    const double sq_err = std::abs(sq - std::numbers::pi / 4.0);
    verdict("circularity-exactness", sq_err <= 1e-12 && g64 > 0.998 && collinear_zero,
            fmt::format("square |c - pi/4| = {:.2e} (<= 1e-12), 64-gon {:.6f} (> 0.998), collinear sets -> 0: {}",
                        sq_err, g64, collinear_zero ? "yes" : "no"));
}

void loss_contract()
{
    const LossBreakdown zero = frame_loss(GrayImage(640, 480, 128), 24, 23, DetectionParams::high_res());
    const bool zero_ok = zero == LossBreakdown{0, 0.0, 1000.0, 1000.0};

    SessionSpec spec;
    spec.count = 4;
    spec.seed = 404;
    const Frames subject = render_session(spec);
    const std::vector<double> ts{8, 16, 24, 32, 48};
    const std::vector<int> ks{3, 7, 11, 15, 19, 23};
    const auto records = grid_search(subject.images, ts, ks, DetectionParams::high_res());
    double minimum = INFINITY;
    for (double t : ts)
        for (int k : ks)
            minimum = std::min(minimum, evaluate_cell(subject.images, t, k, DetectionParams::high_res()).mean_loss);
    const bool grid_ok = records.front().mean_loss == minimum;
    verdict("loss-contract", zero_ok && grid_ok,
            fmt::format("zero-contour frame -> ({}, {}, {}, {}); grid best (T={}, K={}) loss {:.3f} vs exhaustive "
                        "minimum {:.3f}",
                        zero.n_contours, zero.a_min, zero.penalty, zero.total, records.front().t_canny,
                        records.front().k_blur, records.front().mean_loss, minimum));
}

void end_to_end()
{
    // Per-subject calibration on separate frames, then the held-out session.
    SessionSpec tune_spec;
    tune_spec.count = 8;
    tune_spec.seed = 77;
    const Frames calib = render_session(tune_spec);
    const std::vector<double> ts{16, 24, 32};
    const std::vector<int> ks{7, 11, 15, 19, 23};
    const auto best = grid_search(calib.images, ts, ks, DetectionParams::high_res()).front();
    DetectionParams p = DetectionParams::high_res();
    p.t_canny = best.t_canny;
    p.k_blur = best.k_blur;

    SessionSpec spec;
    spec.count = 500;
    spec.seed = 2024;
    const auto t0 = std::chrono::steady_clock::now();
    const Frames session = render_session(spec);
    const double rate = rate_within(session, p, 3.0);
    const double secs = seconds_since(t0);
    verdict("end-to-end-synthetic", rate >= 0.95 && secs < 60.0,
            fmt::format("{:.1f}% of 500 frames within 3 px (need >= 95%), {:.1f} s (< 60 s); tuned T={} K={}",
                        100.0 * rate, secs, p.t_canny, p.k_blur));
    info(fmt::format("untuned T=24 K=23 on the same frames: {:.1f}% within 3 px",
                     100.0 * rate_within(session, DetectionParams::high_res(), 3.0)));
}

void blur_direction()
{
    SessionSpec spec;
    spec.count = 100;
    spec.seed = 15;
    spec.noise_sigma = 15.0;
    const Frames f = render_session(spec);
    DetectionParams blur = DetectionParams::high_res();
    DetectionParams none = blur;
    none.k_blur = 1;
    const double with = rate_within(f, blur, 5.0);
    const double without = rate_within(f, none, 5.0);
    verdict("blur-direction", with > without,
            fmt::format("sigma 15: K=23 {:.0f}% vs no blur {:.0f}% within 5 px (need strictly greater)",
                        100.0 * with, 100.0 * without));
}

void latency()
{
    SessionSpec hi;
    hi.count = 20;
    hi.seed = 9;
    const TimingReport high = bench(render_session(hi).images, DetectionParams::high_res(), 3);

    SessionSpec lo;
    lo.width = 320;
    lo.height = 240;
    lo.count = 20;
    lo.seed = 10;
    lo.center_margin = 40;
    lo.pupil_area_min = 120;
    lo.pupil_area_max = 280;
    const TimingReport low = bench(render_session(lo).images, DetectionParams::low_res(), 3);

    const double hi_ms = high.find(Stage::total)->median_ms;
    const double lo_ms = low.find(Stage::total)->median_ms;
    const StageStats* largest = nullptr;
    for (const auto& st : high.stages)
        if (st.stage != Stage::total && (!largest || st.median_ms > largest->median_ms))
            largest = &st;
    verdict("latency", hi_ms <= 54.0 && lo_ms <= 23.0 && largest->stage == Stage::blur,
            fmt::format("640x480 median {:.2f} ms (<= 54), 320x240 median {:.2f} ms (<= 23), largest stage {} "
                        "({:.2f} ms, {:.0f}% of total)",
                        hi_ms, lo_ms, stage_name(largest->stage), largest->median_ms,
                        100.0 * largest->median_ms / hi_ms));
}

void harness_math()
{
    const fs::path dir = fs::temp_directory_path() / fmt::format("edgepupil-accept-{}", ::getpid());
    fs::remove_all(dir);
    SessionSpec spec;
    spec.width = 320;
    spec.height = 240;
    spec.center_margin = 40;
    spec.pupil_area_min = 150;
    spec.pupil_area_max = 250;
    spec.count = 21;
    make_session(spec, dir);
    const AnnotatedSet set = load_annotated_set(dir, Layout::marker_session);
    fs::remove_all(dir);

    // Frame i is off by exactly i px along an axis.
    std::vector<std::optional<Point2d>> det;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Point2d t = set.truth[i];
        det.push_back(i % 2 ? Point2d{t.x + static_cast<double>(i), t.y} : Point2d{t.x, t.y - static_cast<double>(i)});
    }
    const EvalReport rep = build_report(set.truth, det);
    bool exact = set.size() == 21;
    for (int e = 0; e <= kCurveMaxPx && exact; ++e)
        exact = rep.curve[e] == static_cast<double>(e + 1) / 21.0;

    // Ordering on a batch of arbitrary reports.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 25.0);
    std::bernoulli_distribution miss(0.2);
    bool ordered = rep.rate_at_5px <= rep.rate_at_10px;
    for (int r = 0; r < 200; ++r) {
        std::vector<Point2d> truth(30, Point2d{0, 0});
        std::vector<std::optional<Point2d>> d;
        for (int i = 0; i < 30; ++i)
            d.push_back(miss(rng) ? std::nullopt : std::optional<Point2d>(Point2d{u(rng), u(rng)}));
        const EvalReport x = build_report(truth, d);
        ordered = ordered && x.rate_at_5px <= x.rate_at_10px;
    }
    verdict("eval-harness-math", exact && ordered,
            fmt::format("planted errors 0..20 px give curve[e] = (e+1)/21 exactly: {}; rate@5 <= rate@10 on 201 "
                        "reports: {}",
                        exact ? "yes" : "no", ordered ? "yes" : "no"));
}

void lpw()
{
    const char* root = std::getenv("EDGEPUPIL_LPW_DIR");
    if (!root || !*root) {
        skip("lpw-integration", "set EDGEPUPIL_LPW_DIR to a directory of extracted LPW frames");
        return;
    }
    // Every directory below root with numbered frames and an annotation file
    // is one use case.
    std::vector<fs::path> cases;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_directory())
            continue;
        fs::path ann = e.path();
        ann += ".txt";
        if (fs::is_regular_file(ann))
            cases.push_back(e.path());
    }
    std::sort(cases.begin(), cases.end());
    if (cases.empty()) {
        verdict("lpw-integration", false, fmt::format("no use cases (<dir> + <dir>.txt) under {}", root));
        return;
    }
    DetectionParams p = DetectionParams::high_res();
    if (const char* pf = std::getenv("EDGEPUPIL_LPW_PARAMS"))
        p = load_params(pf);
    std::vector<EvalReport> reports;
    bool ok = true;
    for (const auto& c : cases) {
        try {
            const EvalReport r = evaluate(load_annotated_set(c, Layout::lpw_frames), p);
            bool monotone = true;
            for (int e = 1; e <= kCurveMaxPx; ++e)
                monotone = monotone && r.curve[e - 1] <= r.curve[e];
            ok = ok && monotone && r.rate_at_5px > 0.0;
            info(fmt::format("{}: {} frames, <5 px {:.1f}%, <10 px {:.1f}% (reference 38.2% / 43.6%, +-15 pp)",
                             c.string(), r.per_frame.size(), 100.0 * r.rate_at_5px, 100.0 * r.rate_at_10px));
            reports.push_back(r);
        } catch (const Error& e) {
            ok = false;
            info(fmt::format("{}: {}", c.string(), e.what()));
        }
    }
    const MacroSummary m = macro_average(reports);
    verdict("lpw-integration", ok,
            fmt::format("{} use cases, monotone curves with nonzero 5 px rate; macro <5 px {:.1f}%, <10 px {:.1f}%",
                        cases.size(), 100.0 * m.rate_at_5px, 100.0 * m.rate_at_10px));
}

}  // namespace

int main()
{
    try {
        oracle_equivalence();
        ellipse_recovery();
        circularity_exactness();
        loss_contract();
        end_to_end();
        blur_direction();
        latency();
        harness_math();
        lpw();
    } catch (const std::exception& e) {
        fmt::print("FAIL  acceptance aborted: {}\n", e.what());
        return 2;
    }
    fmt::print("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
