#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgepupil/error.hpp"
#include "edgepupil/image_io.hpp"
#include "edgepupil/pipeline.hpp"

namespace edgepupil {

struct StageStats {
    Stage stage = Stage::total;
    std::vector<double> samples_ms;
    double min_ms = 0.0;
    double p25_ms = 0.0;
    double median_ms = 0.0;
    double p75_ms = 0.0;
    double max_ms = 0.0;
};

struct TimingReport {
    std::vector<StageStats> stages;  // pipeline order; only stages that ran
    std::size_t frame_count = 0;     // frames per sweep
    std::size_t repeat = 0;
    ImageSize resolution;
    DetectionParams params;
    std::optional<long> peak_rss_kb;        // informational; absent when the OS does not report it
    std::optional<double> throughput_fps;   // parallel mode only

    const StageStats* find(Stage s) const noexcept;
};

struct BenchOptions {
    // 0 keeps the run single-threaded. Otherwise an extra sweep runs on this
    // many threads and only its wall-clock throughput is reported.
    unsigned parallel_threads = 0;
};

// Thrown when a frame fails mid-benchmark; carries what was measured so far.
class BenchAborted : public Error {
public:
    BenchAborted(const std::string& what, std::size_t frame_index, TimingReport partial)
        : Error(what), frame_index(frame_index), partial(std::move(partial))
    {
    }
    std::size_t frame_index;
    TimingReport partial;
};

// Linear interpolation between closest ranks; q in [0, 1]. `sorted` must be
// non-empty and ascending.
double percentile(std::span<const double> sorted, double q);

// One warm-up sweep over the frames (discarded), then frames x repeat timed
// detections.
TimingReport bench(std::span<const GrayImage> frames, const DetectionParams& params, std::size_t repeat,
                   const BenchOptions& opts = {});

std::optional<long> peak_rss_kb() noexcept;

// `stage,min_ms,p25_ms,median_ms,p75_ms,max_ms`
void write_timing_csv(std::ostream& out, const TimingReport& report);
// Full report including every sample.
std::string timing_to_json(const TimingReport& report);

}  // namespace edgepupil
