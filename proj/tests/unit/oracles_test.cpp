#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "oracles/reference_oracles.hpp"

namespace edgepupil::oracle {
namespace {

// The oracles are checked against hand-worked cases before anything is
// compared against them.

TEST(NaiveMedian, HandWorked)
{
    // 3x3 image 1..9, k = 3. Corner (0,0) with clamping sees
    // 1 1 2 / 1 1 2 / 4 4 5 -> sorted 1 1 1 1 2 2 4 4 5 -> 2.
    const GrayImage img(3, 3, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8, 9});
    const GrayImage m = naive_median(img, 3);
    EXPECT_EQ(m(0, 0), 2);
    EXPECT_EQ(m(1, 1), 5);
    EXPECT_EQ(m(2, 2), 8);
}

TEST(BruteForceHull, HandWorked)
{
    const auto h = brute_force_hull({{0, 0}, {2, 0}, {1, 1}, {2, 2}, {0, 2}, {1, 0}, {0, 0}});
    EXPECT_EQ(h, (std::vector<Point2d>{{0, 0}, {0, 2}, {2, 0}, {2, 2}}));
    const auto line = brute_force_hull({{0, 0}, {1, 1}, {2, 2}});
    EXPECT_EQ(line, (std::vector<Point2d>{{0, 0}, {2, 2}}));
}

TEST(HullOracles, TriangleAndCollinearAgree)
{
    const std::vector<Point2d> tri{{0, 0}, {5, 1}, {2, 4}};
    auto fast = convex_hull(tri).vertices;
    std::sort(fast.begin(), fast.end(), [](Point2d a, Point2d b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    EXPECT_EQ(fast, brute_force_hull(tri));
    const std::vector<Point2d> line{{0, 0}, {1, 2}, {2, 4}, {3, 6}};
    EXPECT_EQ(convex_hull(line).area, 0.0);
    EXPECT_EQ(fan_triangulation_area(brute_force_hull(line)), 0.0);
}

TEST(MedianOracle, ConstantAndLargerKernel)
{
    const GrayImage flat(16, 16, 9);
    EXPECT_EQ(naive_median(flat, 3), flat);
    for (const auto& r : check_median_oracle(30, 16, 5, 99))
        EXPECT_TRUE(r.pass) << r.case_id;
}

TEST(FanArea, Triangle)
{
    EXPECT_DOUBLE_EQ(fan_triangulation_area({{0, 0}, {4, 0}, {0, 3}}), 6.0);
}

TEST(Components, HandWorked)
{
    EdgeMap e(4, 4);
    e.set(0, 0);
    e.set(1, 1);
    e.set(3, 0);
    e.set(3, 3);
    const auto cs = exhaustive_components(e);
    ASSERT_EQ(cs.size(), 3u);
    EXPECT_EQ(cs[0].size(), 2u);
}

TEST(EllipseDistance, PointsOnAndOff)
{
    const EllipseFit e{0, 0, 5, 3, 0};
    EXPECT_LT(max_distance_to_ellipse(e, {{5, 0}, {0, 3}, {-5, 0}}), 1e-3);
    EXPECT_NEAR(max_distance_to_ellipse(e, {{7, 0}}), 2.0, 1e-3);
}

TEST(Harness, HullAndMedianReportsPass)
{
    for (const auto& r : check_hull_oracle(200, 12, 3))
        EXPECT_TRUE(r.pass) << r.case_id;
    for (const auto& r : check_median_oracle(20, 16, 3, 4))
        EXPECT_TRUE(r.pass) << r.case_id;
}

}  // namespace
}  // namespace edgepupil::oracle
