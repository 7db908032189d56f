#include <fragrd/geom/indices.hpp>

#include <algorithm>
#include <random>

namespace fragrd::geom {

namespace {

struct Ball {
    Point c{};
    double r2 = -1.0;

    bool covers(const Point& p, int dim) const
    {
        return squared_distance(p, c, dim) <= r2 * (1.0 + 1e-12) + 1e-300;
    }
};

// Smallest ball with all support points on its boundary: the circumcenter of
// the support within its affine hull.
Ball ball_through(const std::vector<Point>& s, int dim)
{
    Ball b;
    if (s.empty()) return b;
    const Point& p0 = s[0];
    const std::size_t k = s.size() - 1;
    if (k == 0) {
        b.c = p0;
        b.r2 = 0.0;
        return b;
    }
    // Solve G lambda = rhs with G_ij = 2 (p_i - p0).(p_j - p0), rhs_i = |p_i - p0|^2.
    double g[3][4] = {};
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double d = 0.0;
            for (int a = 0; a < dim; ++a) d += (s[i + 1][a] - p0[a]) * (s[j + 1][a] - p0[a]);
            g[i][j] = 2.0 * d;
        }
        g[i][k] = squared_distance(s[i + 1], p0, dim);
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) scale = std::max(scale, std::abs(g[i][i]));
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < k; ++row)
            if (std::abs(g[row][col]) > std::abs(g[piv][col])) piv = row;
        if (std::abs(g[piv][col]) <= 1e-12 * scale) {
            // Affinely dependent support: fall back to the widest diametral pair.
            double best = -1.0;
            for (std::size_t i = 0; i < s.size(); ++i)
                for (std::size_t j = i + 1; j < s.size(); ++j) {
                    const double d = squared_distance(s[i], s[j], dim);
                    if (d > best) {
                        best = d;
                        for (int a = 0; a < dim; ++a) b.c[a] = 0.5 * (s[i][a] + s[j][a]);
                        b.r2 = d / 4.0;
                    }
                }
            return b;
        }
        if (piv != col)
            for (std::size_t j = 0; j <= k; ++j) std::swap(g[col][j], g[piv][j]);
        for (std::size_t row = 0; row < k; ++row) {
            if (row == col) continue;
            const double f = g[row][col] / g[col][col];
            for (std::size_t j = col; j <= k; ++j) g[row][j] -= f * g[col][j];
        }
    }
    b.c = p0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lam = g[i][k] / g[i][i];
        for (int a = 0; a < dim; ++a) b.c[a] += lam * (s[i + 1][a] - p0[a]);
    }
    b.r2 = squared_distance(b.c, p0, dim);
    return b;
}

Ball mtf(std::vector<Point>& pts, std::size_t n, std::vector<Point>& support, int dim)
{
    Ball b = ball_through(support, dim);
    if (static_cast<int>(support.size()) == dim + 1) return b;
    for (std::size_t i = 0; i < n; ++i) {
        if (b.r2 >= 0.0 && b.covers(pts[i], dim)) continue;
        support.push_back(pts[i]);
        b = mtf(pts, i, support, dim);
        support.pop_back();
        std::rotate(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(i), pts.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    }
    return b;
}

} // namespace

EnclosingBall min_enclosing_ball(std::vector<Point> points, int dim)
{
    check_dim(dim);
    if (points.empty()) throw GeometryError("enclosing ball of an empty point set");
    std::mt19937_64 rng(0x5eed);
    for (std::size_t i = points.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(points[i - 1], points[j]);
    }
    std::vector<Point> support;
    const Ball b = mtf(points, points.size(), support, dim);
    return {b.c, std::sqrt(std::max(0.0, b.r2))};
}

namespace {

double cross(const Point& o, const Point& a, const Point& b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::vector<Point> hull_2d(std::vector<Point> pts)
{
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
        h[k++] = pts[i - 1];
    }
    h.resize(k - 1);
    return h;
}

} // namespace

std::vector<Point> extreme_centers(const RasterSet& r)
{
    const Grid& g = r.grid;
    const int last = g.dim - 1;
    const auto n = g.extents[last];
    const auto st = g.strides();
    const std::size_t lines = g.size() / static_cast<std::size_t>(n);
    std::vector<Point> ext;
    // Line starts along the last axis, grouped by the index on axis 0.
    std::vector<Point> plane;
    std::int64_t current_plane = -1;
    auto flush_plane = [&]() {
        if (g.dim == 3) {
            auto h = hull_2d([&] {
                std::vector<Point> proj;
                proj.reserve(plane.size());
                for (const auto& p : plane) proj.push_back({p[1], p[2], p[0]});
                return proj;
            }());
            for (const auto& p : h) ext.push_back({p[2], p[0], p[1]});
        } else {
            ext.insert(ext.end(), plane.begin(), plane.end());
        }
        plane.clear();
    };
    for (std::size_t line = 0; line < lines; ++line) {
        const std::size_t base = line * static_cast<std::size_t>(n);
        std::int64_t lo = -1, hi = -1;
        for (std::int64_t q = 0; q < n; ++q) {
            if (r.occupied(base + static_cast<std::size_t>(q))) {
                if (lo < 0) lo = q;
                hi = q;
            }
        }
        if (lo < 0) continue;
        const auto plane_index = static_cast<std::int64_t>(base / st[0]);
        if (g.dim == 3 && plane_index != current_plane) {
            if (!plane.empty()) flush_plane();
            current_plane = plane_index;
        }
        plane.push_back(g.center(base + static_cast<std::size_t>(lo)));
        if (hi != lo) plane.push_back(g.center(base + static_cast<std::size_t>(hi)));
    }
    if (!plane.empty()) flush_plane();
    if (g.dim == 2) ext = hull_2d(std::move(ext));
    return ext;
}

EnclosingBall enclosing_ball(const RasterSet& r)
{
    const auto ext = extreme_centers(r);
    if (ext.empty()) throw GeometryError("enclosing ball of a negligible set");
    const int dim = r.grid.dim;
    const double inflate = r.grid.h * std::sqrt(static_cast<double>(dim)) / 2.0;
    if (dim == 1) {
        double lo = ext.front()[0], hi = ext.front()[0];
        for (const auto& p : ext) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        return {{0.5 * (lo + hi), 0.0, 0.0}, 0.5 * (hi - lo) + inflate};
    }
    auto b = min_enclosing_ball(ext, dim);
    b.radius += inflate;
    return b;
}

double essential_diameter(const RasterSet& r)
{
    const auto ext = extreme_centers(r);
    if (ext.empty()) throw GeometryError("diameter of a negligible set");
    const int dim = r.grid.dim;
    double best = 0.0;
    for (std::size_t i = 0; i < ext.size(); ++i)
        for (std::size_t j = i + 1; j < ext.size(); ++j) best = std::max(best, squared_distance(ext[i], ext[j], dim));
    return std::sqrt(best) + r.grid.h * std::sqrt(static_cast<double>(dim));
}

} // namespace fragrd::geom
