#include "swarm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace swarm {

namespace {

constexpr double kSedSlack = 1e-12;

bool in_disc(const Disc& d, Point2 p) {
    return distance(d.center, p) <= d.radius * (1.0 + kSedSlack) + kSedSlack;
}

Disc disc_from_two(Point2 a, Point2 b) {
    Point2 c = {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
    return {c, distance(a, b) / 2.0};
}

// Circumcircle of three points; falls back to the widest diameter disc when
// the points are (numerically) collinear.
Disc disc_from_three(Point2 a, Point2 b, Point2 c) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    const double scale = std::max({norm(a - b), norm(b - c), norm(c - a), 1.0});
    if (std::abs(d) < 1e-14 * scale * scale) {
        Disc best = disc_from_two(a, b);
        for (Disc cand : {disc_from_two(a, c), disc_from_two(b, c)})
            if (cand.radius > best.radius) best = cand;
        return best;
    }
    const double a2 = norm2(a), b2 = norm2(b), c2 = norm2(c);
    Point2 center = {(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                     (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    const double r = std::max({distance(center, a), distance(center, b), distance(center, c)});
    return {center, r};
}

// Smallest disc containing pts[0..n) with q1 and q2 on the boundary.
Disc sed_two_fixed(std::span<const Point2> pts, std::size_t n, Point2 q1, Point2 q2) {
    Disc d = disc_from_two(q1, q2);
    for (std::size_t k = 0; k < n; ++k) {
        if (!in_disc(d, pts[k])) d = disc_from_three(pts[k], q1, q2);
    }
    return d;
}

// Smallest disc containing pts[0..n) with q on the boundary.
Disc sed_one_fixed(std::span<const Point2> pts, std::size_t n, Point2 q) {
    Disc d = disc_from_two(pts[0], q);
    for (std::size_t j = 1; j < n; ++j) {
        if (!in_disc(d, pts[j])) d = sed_two_fixed(pts, j, pts[j], q);
    }
    return d;
}

}  // namespace

Disc smallest_enclosing_disc(std::span<const Point2> points, std::mt19937_64& rng) {
    if (points.empty()) throw std::invalid_argument("empty point set");
    std::vector<Point2> pts(points.begin(), points.end());
    std::shuffle(pts.begin(), pts.end(), rng);

    Disc d = {pts[0], 0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!in_disc(d, pts[i])) d = sed_one_fixed(pts, i, pts[i]);
    }
    return d;
}

Disc smallest_enclosing_disc(std::span<const Point2> points) {
    std::mt19937_64 rng(0x5edc19c1eULL);
    return smallest_enclosing_disc(points, rng);
}

double convex_hull_perimeter(std::span<const Point2> points) {
    if (points.empty()) throw std::invalid_argument("empty point set");
    std::vector<Point2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(),
              [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n == 1) return 0.0;

    // Monotone chain; collinear vertices are dropped.
    std::vector<Point2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);  // last point equals the first

    double perim = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i)
        perim += distance(hull[i], hull[(i + 1) % hull.size()]);
    return perim;
}

double dispersion(std::span<const Point2> points) {
    if (points.empty()) throw std::invalid_argument("empty point set");
    Point2 centroid{0.0, 0.0};
    for (Point2 p : points) centroid += p;
    centroid = centroid * (1.0 / static_cast<double>(points.size()));
    double sum = 0.0;
    for (Point2 p : points) sum += distance(p, centroid);
    return sum;
}

namespace {

struct UnionFind {
    std::vector<int> parent, size;
    explicit UnionFind(int n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a); b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

}  // namespace

double cluster_fraction(std::span<const Point2> points, double robot_radius,
                        double touch_tolerance) {
    if (points.empty()) throw std::invalid_argument("empty point set");
    const int n = static_cast<int>(points.size());
    const double reach = 2.0 * robot_radius + touch_tolerance;
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (distance(points[i], points[j]) <= reach) uf.unite(i, j);
    int largest = 0;
    for (int i = 0; i < n; ++i) largest = std::max(largest, uf.size[uf.find(i)]);
    return static_cast<double>(largest) / static_cast<double>(n);
}

namespace {

// Axial lattice directions of the triangular lattice, 60 degrees apart.
constexpr int kAxialDir[6][2] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};

Point2 axial_point(int q, int r, double s) {
    return {s * (q + r / 2.0), s * (r * std::sqrt(3.0) / 2.0)};
}

// Sites of hex ring k in counter-clockwise walk order.
std::vector<Point2> ring_sites(int k, double s) {
    if (k == 0) return {axial_point(0, 0, s)};
    std::vector<Point2> out;
    out.reserve(6 * k);
    int q = k, r = 0;
    for (int side = 0; side < 6; ++side) {
        const int* d = kAxialDir[(side + 2) % 6];
        for (int step = 0; step < k; ++step) {
            out.push_back(axial_point(q, r, s));
            q += d[0];
            r += d[1];
        }
    }
    return out;
}

}  // namespace

double min_dispersion_baseline(int n, double spacing) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (spacing <= 0.0) throw std::invalid_argument("spacing must be > 0");
    std::vector<Point2> chosen;
    chosen.reserve(n);
    int ring = 0;
    while (static_cast<int>(chosen.size()) < n) {
        std::vector<Point2> remaining = ring_sites(ring, spacing);
        while (!remaining.empty() && static_cast<int>(chosen.size()) < n) {
            std::size_t best = 0;
            double best_d = -1.0;
            for (std::size_t i = 0; i < remaining.size(); ++i) {
                chosen.push_back(remaining[i]);
                const double d = dispersion(chosen);
                chosen.pop_back();
                if (best_d < 0.0 || d < best_d - 1e-15) {
                    best_d = d;
                    best = i;
                }
            }
            chosen.push_back(remaining[best]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
        }
        ++ring;
    }
    return dispersion(chosen);
}

MetricsSample evaluate_metrics(double time, std::span<const Point2> points,
                               double robot_radius, double touch_tolerance) {
    MetricsSample s;
    s.time = time;
    s.sed_circumference = kTwoPi * smallest_enclosing_disc(points).radius;
    s.hull_perimeter = convex_hull_perimeter(points);
    s.dispersion = dispersion(points);
    s.cluster_fraction = cluster_fraction(points, robot_radius, touch_tolerance);
    return s;
}

}  // namespace swarm
