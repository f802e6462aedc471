#include "edgepupil/profile.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "edgepupil/error.hpp"
#include "edgepupil/params_io.hpp"

namespace edgepupil {

const StageStats* TimingReport::find(Stage s) const noexcept
{
    for (const auto& st : stages)
        if (st.stage == s)
            return &st;
    return nullptr;
}

double percentile(std::span<const double> sorted, double q)
{
    if (sorted.empty())
        throw InvalidArgument("percentile: no samples");
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::optional<long> peak_rss_kb() noexcept
{
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0 || usage.ru_maxrss <= 0)
        return std::nullopt;
    return usage.ru_maxrss;  // kilobytes on Linux
}

namespace {

void summarize(TimingReport& rep, std::array<std::vector<double>, kStageCount>& samples)
{
    rep.stages.clear();
    for (Stage s : kAllStages) {
        auto& v = samples[static_cast<std::size_t>(s)];
        if (v.empty())
            continue;
        StageStats st;
        st.stage = s;
        st.samples_ms = v;
        std::sort(v.begin(), v.end());
        st.min_ms = v.front();
        st.p25_ms = percentile(v, 0.25);
        st.median_ms = percentile(v, 0.5);
        st.p75_ms = percentile(v, 0.75);
        st.max_ms = v.back();
        rep.stages.push_back(std::move(st));
    }
}

double throughput(std::span<const GrayImage> frames, const DetectionParams& params, std::size_t repeat,
                  unsigned threads)
{
    const std::size_t jobs = frames.size() * repeat;
    std::atomic<std::size_t> next{0};
    const auto start = std::chrono::steady_clock::now();
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs; j = next++)
                    (void)detect(frames[j % frames.size()], params);
            });
    }
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    return wall.count() > 0.0 ? static_cast<double>(jobs) / wall.count() : 0.0;
}

}  // namespace

TimingReport bench(std::span<const GrayImage> frames, const DetectionParams& params, std::size_t repeat,
                   const BenchOptions& opts)
{
    if (frames.empty())
        throw InvalidArgument("bench: no frames");
    if (repeat < 1)
        throw InvalidArgument("bench: repeat must be >= 1");
    params.validate();

    TimingReport rep;
    rep.frame_count = frames.size();
    rep.repeat = repeat;
    rep.resolution = {frames.front().width(), frames.front().height()};
    rep.params = params;

    std::array<std::vector<double>, kStageCount> samples;
    std::size_t index = 0;
    try {
        for (index = 0; index < frames.size(); ++index)
            (void)detect(frames[index], params);

        for (std::size_t r = 0; r < repeat; ++r) {
            for (index = 0; index < frames.size(); ++index) {
                const DetectionResult res = detect(frames[index], params);
                for (Stage s : kAllStages) {
                    if (const auto d = res.timings[s])
                        samples[static_cast<std::size_t>(s)].push_back(
                            std::chrono::duration<double, std::milli>(*d).count());
                }
            }
        }
    } catch (const Error& e) {
        summarize(rep, samples);
        rep.peak_rss_kb = peak_rss_kb();
        throw BenchAborted(fmt::format("bench aborted at frame {}: {}", index, e.what()), index, std::move(rep));
    }

    summarize(rep, samples);
    if (opts.parallel_threads > 0)
        rep.throughput_fps = throughput(frames, params, repeat, opts.parallel_threads);
    rep.peak_rss_kb = peak_rss_kb();
    return rep;
}

void write_timing_csv(std::ostream& out, const TimingReport& report)
{
    out << "stage,min_ms,p25_ms,median_ms,p75_ms,max_ms\n";
    for (const auto& st : report.stages)
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", stage_name(st.stage), st.min_ms, st.p25_ms,
                           st.median_ms, st.p75_ms, st.max_ms);
}

std::string timing_to_json(const TimingReport& report)
{
    using nlohmann::json;
    json stages = json::array();
    for (const auto& st : report.stages) {
        stages.push_back({{"stage", stage_name(st.stage)},
                          {"min_ms", st.min_ms},
                          {"p25_ms", st.p25_ms},
                          {"median_ms", st.median_ms},
                          {"p75_ms", st.p75_ms},
                          {"max_ms", st.max_ms},
                          {"samples_ms", st.samples_ms}});
    }
    json doc{{"frame_count", report.frame_count},
             {"repeat", report.repeat},
             {"resolution", {{"width", report.resolution.width}, {"height", report.resolution.height}}},
             {"params", json::parse(params_to_json(report.params))},
             {"peak_rss_kb", report.peak_rss_kb ? json(*report.peak_rss_kb) : json(nullptr)},
             {"throughput_fps", report.throughput_fps ? json(*report.throughput_fps) : json(nullptr)},
             {"stages", stages}};
    return doc.dump(2) + "\n";
}

}  // namespace edgepupil
