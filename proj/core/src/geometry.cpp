#include "edgepupil/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "edgepupil/error.hpp"

namespace edgepupil {

double EllipseFit::area() const noexcept
{
    return std::numbers::pi * a * b;
}

std::vector<Contour> extract_contours(const EdgeMap& edges)
{
    const int w = edges.width();
    const int h = edges.height();
    std::vector<Contour> contours;
    if (w == 0 || h == 0)
        return contours;

    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<Point2i> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!edges(x, y) || seen[static_cast<std::size_t>(y) * w + x])
                continue;
            Contour c;
            seen[static_cast<std::size_t>(y) * w + x] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Point2i p = stack.back();
                stack.pop_back();
                c.points.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h || !edges(nx, ny))
                            continue;
                        auto& s = seen[static_cast<std::size_t>(ny) * w + nx];
                        if (!s) {
                            s = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            std::sort(c.points.begin(), c.points.end(),
                      [](const Point2i& a, const Point2i& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
            contours.push_back(std::move(c));
        }
    }
    return contours;
}

std::vector<Point2d> to_points(const Contour& contour)
{
    std::vector<Point2d> pts;
    pts.reserve(contour.points.size());
    for (const auto& p : contour.points)
        pts.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    return pts;
}

double circularity(double area, double circumference) noexcept
{
    if (area <= 0.0 || circumference <= 0.0)
        return 0.0;
    return 4.0 * std::numbers::pi * area / (circumference * circumference);
}

namespace {

double cross(const Point2d& o, const Point2d& a, const Point2d& b) noexcept
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

HullMetrics polygon_metrics(std::vector<Point2d> vertices)
{
    HullMetrics m;
    m.vertices = std::move(vertices);
    const auto& v = m.vertices;
    const std::size_t n = v.size();
    if (n >= 2) {
        for (std::size_t i = 0; i < n; ++i) {
            const Point2d& p = v[i];
            const Point2d& q = v[(i + 1) % n];
            m.circumference += std::hypot(q.x - p.x, q.y - p.y);
        }
    }
    if (n >= 3) {
        double twice = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Point2d& p = v[i];
            const Point2d& q = v[(i + 1) % n];
            twice += p.x * q.y - q.x * p.y;
        }
        m.area = std::max(0.0, 0.5 * twice);
    }
    m.circularity = circularity(m.area, m.circumference);
    return m;
}

HullMetrics convex_hull(std::span<const Point2d> points)
{
    if (points.empty())
        throw InvalidArgument("convex_hull: empty point set");

    std::vector<Point2d> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Point2d& a, const Point2d& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3)
        return polygon_metrics(std::move(pts));

    std::vector<Point2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0)
            --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);  // last point repeats the first
    return polygon_metrics(std::move(hull));
}

HullMetrics convex_hull(const Contour& contour)
{
    const auto pts = to_points(contour);
    return convex_hull(std::span<const Point2d>(pts));
}

EllipseFit conic_to_ellipse(const Conic& conic)
{
    // The conic is defined up to scale; fix the sign so the quadratic part is
    // positive definite and the eigenvalue order matches the axis order.
    const double sign = conic.a + conic.c < 0.0 ? -1.0 : 1.0;
    const Conic q{sign * conic.a, sign * conic.b, sign * conic.c, sign * conic.d, sign * conic.e, sign * conic.f};
    if (4.0 * q.a * q.c - q.b * q.b <= 0.0)
        throw FitDegenerate("conic is not an ellipse");

    Eigen::Matrix2d quad;
    quad << 2.0 * q.a, q.b, q.b, 2.0 * q.c;
    const Eigen::Vector2d center = quad.fullPivLu().solve(Eigen::Vector2d(-q.d, -q.e));
    const double cx = center.x();
    const double cy = center.y();
    const double f0 = q.a * cx * cx + q.b * cx * cy + q.c * cy * cy + q.d * cx + q.e * cy + q.f;

    Eigen::Matrix2d sym;
    sym << q.a, 0.5 * q.b, 0.5 * q.b, q.c;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
    const Eigen::Vector2d lambda = es.eigenvalues();  // ascending
    const double s0 = -f0 / lambda(0);
    const double s1 = -f0 / lambda(1);
    if (!(s0 > 0.0 && s1 > 0.0) || !std::isfinite(s0) || !std::isfinite(s1))
        throw FitDegenerate("conic has no real points");

    // Smaller eigenvalue belongs to the longer axis.
    EllipseFit e;
    e.cx = cx;
    e.cy = cy;
    e.a = std::sqrt(s0);
    e.b = std::sqrt(s1);
    const Eigen::Vector2d major = es.eigenvectors().col(0);
    double theta = std::atan2(major.y(), major.x());
    if (theta < 0.0)
        theta += std::numbers::pi;
    if (theta >= std::numbers::pi)
        theta -= std::numbers::pi;
    e.theta = theta;
    return e;
}

EllipseFit fit_ellipse(std::span<const Point2d> points)
{
    const std::size_t n = points.size();
    if (n < 5)
        throw FitDegenerate("fit_ellipse: need at least 5 points, got " + std::to_string(n));

    // Normalize to zero mean and unit RMS radius for conditioning.
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double spread = 0.0;
    for (const auto& p : points)
        spread += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    spread = std::sqrt(spread / static_cast<double>(n));
    if (!(spread > 0.0))
        throw FitDegenerate("fit_ellipse: all points coincide");
    const double s = 1.0 / spread;

    Eigen::MatrixX3d quad(n, 3), lin(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (points[i].x - mx) * s;
        const double y = (points[i].y - my) * s;
        quad.row(static_cast<Eigen::Index>(i)) << x * x, x * y, y * y;
        lin.row(static_cast<Eigen::Index>(i)) << x, y, 1.0;
    }
    const Eigen::Matrix3d s1 = quad.transpose() * quad;
    const Eigen::Matrix3d s2 = quad.transpose() * lin;
    const Eigen::Matrix3d s3 = lin.transpose() * lin;

    // Collinear points make the linear scatter singular.
    Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
    s3_lu.setThreshold(1e-10);
    if (s3_lu.rank() < 3)
        throw FitDegenerate("fit_ellipse: points are collinear");

    const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
    const Eigen::Matrix3d reduced = s1 + s2 * t;
    // Premultiply by the inverse of the 3x3 constraint block.
    Eigen::Matrix3d m;
    m.row(0) = reduced.row(2) / 2.0;
    m.row(1) = -reduced.row(1);
    m.row(2) = reduced.row(0) / 2.0;

    Eigen::EigenSolver<Eigen::Matrix3d> es(m);
    if (es.info() != Eigen::Success)
        throw FitDegenerate("fit_ellipse: eigen decomposition failed");

    // Exactly one eigenvector satisfies 4AC - B^2 > 0 for non-degenerate data;
    // keep the one with the smallest eigenvalue among those that do.
    int best = -1;
    double best_lambda = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d v = es.eigenvectors().col(i).real();
        const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
        const double lambda = es.eigenvalues()(i).real();
        if (cond > 0.0 && (best < 0 || lambda < best_lambda)) {
            best = i;
            best_lambda = lambda;
        }
    }
    if (best < 0)
        throw FitDegenerate("fit_ellipse: no elliptical solution");

    const Eigen::Vector3d a1 = es.eigenvectors().col(best).real();
    const Eigen::Vector3d a2 = t * a1;

    // Undo the scaling only; the conic stays centered on the mean so that a
    // translation of the input reaches the result through (mx, my) alone.
    const Conic centered{a1(0) * s * s, a1(1) * s * s, a1(2) * s * s, a2(0) * s, a2(1) * s, a2(2)};
    EllipseFit fit = conic_to_ellipse(centered);
    fit.cx += mx;
    fit.cy += my;
    return fit;
}

EllipseFit fit_ellipse(const Contour& contour)
{
    const auto pts = to_points(contour);
    return fit_ellipse(std::span<const Point2d>(pts));
}

Point2d centroid(std::span<const Point2d> vertices)
{
    if (vertices.empty())
        throw InvalidArgument("centroid: empty polygon");

    const std::size_t n = vertices.size();
    if (n >= 3) {
        double twice = 0.0, sx = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Point2d& p = vertices[i];
            const Point2d& q = vertices[(i + 1) % n];
            const double c = p.x * q.y - q.x * p.y;
            twice += c;
            sx += (p.x + q.x) * c;
            sy += (p.y + q.y) * c;
        }
        if (std::abs(twice) > 1e-12) {
            return {sx / (3.0 * twice), sy / (3.0 * twice)};
        }
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& p : vertices) {
        sx += p.x;
        sy += p.y;
    }
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

}  // namespace edgepupil
