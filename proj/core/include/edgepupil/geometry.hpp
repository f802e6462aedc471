#pragma once

#include <span>
#include <vector>

#include "edgepupil/edges.hpp"

namespace edgepupil {

struct Point2i {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point2i&, const Point2i&) = default;
};

struct Point2d {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2d&, const Point2d&) = default;
};

// Pixels of one 8-connected edge component in row-major order.
struct Contour {
    std::vector<Point2i> points;
};

struct HullMetrics {
    std::vector<Point2d> vertices;  // counter-clockwise (positive signed area), no collinear vertices
    double area = 0.0;
    double circumference = 0.0;
    double circularity = 0.0;  // 4*pi*area / circumference^2
};

struct EllipseFit {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.0;      // semi-major
    double b = 0.0;      // semi-minor
    double theta = 0.0;  // major-axis angle in [0, pi)

    double area() const noexcept;
};

// One contour per 8-connected component, ordered by each component's first
// pixel in raster order.
std::vector<Contour> extract_contours(const EdgeMap& edges);

// Andrew's monotone chain. Fewer than three non-collinear points give a
// degenerate hull with zero area and zero circularity.
HullMetrics convex_hull(std::span<const Point2d> points);
HullMetrics convex_hull(const Contour& contour);

// Metrics of an already convex, counter-clockwise polygon.
HullMetrics polygon_metrics(std::vector<Point2d> vertices);

double circularity(double area, double circumference) noexcept;

// Direct least-squares ellipse fit (Fitzgibbon's 4AC - B^2 = 1 constraint,
// solved in Halir-Flusser block form on normalized coordinates). Throws
// FitDegenerate when fewer than five points are given, the scatter is
// rank deficient, or the best conic is not a real ellipse.
EllipseFit fit_ellipse(std::span<const Point2d> points);
EllipseFit fit_ellipse(const Contour& contour);

// Conic coefficients (A, B, C, D, E, F) of A x^2 + B xy + C y^2 + D x + E y + F = 0.
struct Conic {
    double a, b, c, d, e, f;
};
// Throws FitDegenerate unless the conic is a real, non-degenerate ellipse.
EllipseFit conic_to_ellipse(const Conic& conic);

// Area-weighted polygon centroid; arithmetic mean for fewer than three
// points or zero area.
Point2d centroid(std::span<const Point2d> vertices);

std::vector<Point2d> to_points(const Contour& contour);

}  // namespace edgepupil
