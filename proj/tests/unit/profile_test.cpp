#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "edgepupil/profile.hpp"
#include "edgepupil/synth.hpp"

namespace edgepupil {
namespace {

std::vector<GrayImage> small_frames(int n)
{
    std::vector<GrayImage> out;
    for (int i = 0; i < n; ++i) {
        SynthScene s;
        s.width = 160;
        s.height = 120;
        s.pupil = {80.0 + i, 60.0, 8.0, 7.5, 0.0};
        s.noise_sigma = 4.0;
        s.seed = static_cast<std::uint64_t>(i);
        out.push_back(render(s).image);
    }
    return out;
}

TEST(Percentile, LinearInterpolation)
{
    const std::vector<double> v{1, 2, 3, 4, 5};
    EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(percentile(v, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(percentile(v, 0.25), 2.0);
    EXPECT_DOUBLE_EQ(percentile(v, 1.0), 5.0);
    const std::vector<double> w{10, 20};
    EXPECT_DOUBLE_EQ(percentile(w, 0.5), 15.0);
    EXPECT_DOUBLE_EQ(percentile(std::vector<double>{7}, 0.3), 7.0);
    EXPECT_THROW(percentile(std::vector<double>{}, 0.5), InvalidArgument);
}

TEST(Bench, StatsAreOrderedAndComplete)
{
    const auto frames = small_frames(3);
    const TimingReport rep = bench(frames, DetectionParams::low_res(), 4);
    EXPECT_EQ(rep.frame_count, 3u);
    EXPECT_EQ(rep.repeat, 4u);
    EXPECT_EQ(rep.resolution, (ImageSize{160, 120}));
    ASSERT_NE(rep.find(Stage::total), nullptr);
    EXPECT_EQ(rep.find(Stage::grayscale), nullptr);
    for (const auto& st : rep.stages) {
        EXPECT_EQ(st.samples_ms.size(), 12u) << stage_name(st.stage);
        EXPECT_LE(st.min_ms, st.p25_ms);
        EXPECT_LE(st.p25_ms, st.median_ms);
        EXPECT_LE(st.median_ms, st.p75_ms);
        EXPECT_LE(st.p75_ms, st.max_ms);
        EXPECT_GE(st.min_ms, 0.0);
    }
    // Stage times are laps within the total.
    const auto* total = rep.find(Stage::total);
    const auto* blur = rep.find(Stage::blur);
    for (std::size_t i = 0; i < total->samples_ms.size(); ++i)
        EXPECT_LE(blur->samples_ms[i], total->samples_ms[i]);
    EXPECT_FALSE(rep.throughput_fps.has_value());
}

TEST(Bench, SingleFrameSingleRepeat)
{
    const TimingReport rep = bench(small_frames(1), DetectionParams::low_res(), 1);
    for (const auto& st : rep.stages)
        EXPECT_EQ(st.samples_ms.size(), 1u);
}

TEST(Bench, HundredRepeats)
{
    const TimingReport rep = bench(small_frames(1), DetectionParams::low_res(), 100);
    for (const auto& st : rep.stages) {
        EXPECT_EQ(st.samples_ms.size(), 100u);
        EXPECT_LE(st.p25_ms, st.median_ms);
        EXPECT_LE(st.median_ms, st.p75_ms);
    }
}

TEST(Bench, ParallelThroughput)
{
    const auto frames = small_frames(2);
    const TimingReport rep = bench(frames, DetectionParams::low_res(), 2, {.parallel_threads = 2});
    ASSERT_TRUE(rep.throughput_fps.has_value());
    EXPECT_GT(*rep.throughput_fps, 0.0);
}

TEST(Bench, AbortCarriesFrameIndex)
{
    auto frames = small_frames(2);
    frames.push_back(GrayImage(2, 2));
    try {
        bench(frames, DetectionParams::low_res(), 1);
        FAIL();
    } catch (const BenchAborted& e) {
        EXPECT_EQ(e.frame_index, 2u);
        EXPECT_EQ(e.partial.frame_count, 3u);
    }
    EXPECT_THROW(bench(std::span<const GrayImage>{}, DetectionParams::low_res(), 1), InvalidArgument);
    EXPECT_THROW(bench(small_frames(1), DetectionParams::low_res(), 0), InvalidArgument);
}

TEST(Bench, Outputs)
{
    const TimingReport rep = bench(small_frames(1), DetectionParams::low_res(), 2);
    std::ostringstream csv;
    write_timing_csv(csv, rep);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "stage,min_ms,p25_ms,median_ms,p75_ms,max_ms");
    const auto doc = nlohmann::json::parse(timing_to_json(rep));
    EXPECT_EQ(doc["repeat"], 2);
    EXPECT_EQ(doc["params"]["k_blur"], 7);
    EXPECT_EQ(doc["stages"].size(), rep.stages.size());
}

}  // namespace
}  // namespace edgepupil
