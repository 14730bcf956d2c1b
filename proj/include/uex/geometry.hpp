#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <optional>

#include "uex/common.hpp"
#include "uex/rng.hpp"

namespace uex {

// ---------------------------------------------------------------------------
// Directional width

struct WidthResult {
    double width = 0.0;
    std::size_t min_index = 0;  // attains min <p,u>
    std::size_t max_index = 0;  // attains max <p,u>
};

inline WidthResult directional_width(const PointSet& pts, const Direction& u) {
    const std::size_t d = point_set_dim(pts);
    require(d == u.dim(), "dimension mismatch between points and direction");
    WidthResult r;
    double lo = dot(pts[0], u.u), hi = lo;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double t = dot(pts[i], u.u);
        if (t < lo) { lo = t; r.min_index = i; }
        if (t > hi) { hi = t; r.max_index = i; }
    }
    r.width = hi - lo;
    return r;
}

// ---------------------------------------------------------------------------
// Diameter

struct DiameterResult {
    double value = 0.0;
    std::size_t i = 0, j = 0;
};

inline DiameterResult diameter_pair(const PointSet& pts) {
    point_set_dim(pts);
    DiameterResult best;
    for (std::size_t a = 0; a + 1 < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double d2 = dist2(pts[a], pts[b]);
            if (d2 > best.value) { best.value = d2; best.i = a; best.j = b; }
        }
    best.value = std::sqrt(best.value);
    return best;
}

inline double diameter(const PointSet& pts) { return diameter_pair(pts).value; }

// ---------------------------------------------------------------------------
// Smallest enclosing ball (d = 2, 3), Welzl with move-to-front

struct Ball {
    Point center;
    double radius = 0.0;

    bool contains(const Point& p, double tol = 1e-9) const {
        return dist(p, center) <= radius + tol;
    }
};

struct SebResult {
    Ball ball;
    std::vector<std::size_t> support;  // indices into the input, ascending
};

namespace detail {

// Ball with all boundary points in `b` on its surface: circumball within the
// affine hull of b. Points are taken in the given order; callers pass them
// index-sorted so equal support sets give bit-identical balls.
inline std::optional<Ball> ball_from_boundary(const std::vector<const Point*>& b) {
    if (b.empty()) return Ball{{}, -1.0};
    const std::size_t d = b[0]->size();
    const std::size_t k = b.size() - 1;
    Ball out;
    out.center = *b[0];
    if (k == 0) { out.radius = 0.0; return out; }

    // Solve 2 A lambda = rhs with A_ij = <v_i, v_j>, v_i = b[i+1]-b[0].
    std::array<std::array<double, 3>, 3> A{};
    std::array<double, 3> rhs{};
    std::vector<Point> v(k);
    for (std::size_t i = 0; i < k; ++i) v[i] = sub(*b[i + 1], *b[0]);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) A[i][j] = 2.0 * dot(v[i], v[j]);
        rhs[i] = dot(v[i], v[i]);
    }
    // Gaussian elimination with partial pivoting on the k x k system.
    std::array<std::size_t, 3> piv{0, 1, 2};
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t best = c;
        for (std::size_t r2 = c + 1; r2 < k; ++r2)
            if (std::abs(A[piv[r2]][c]) > std::abs(A[piv[best]][c])) best = r2;
        std::swap(piv[c], piv[best]);
        const double p = A[piv[c]][c];
        if (std::abs(p) < 1e-14) return std::nullopt;  // affinely dependent
        for (std::size_t r2 = c + 1; r2 < k; ++r2) {
            const double f = A[piv[r2]][c] / p;
            for (std::size_t c2 = c; c2 < k; ++c2) A[piv[r2]][c2] -= f * A[piv[c]][c2];
            rhs[piv[r2]] -= f * rhs[piv[c]];
        }
    }
    std::array<double, 3> lam{};
    for (std::size_t c = k; c-- > 0;) {
        double s = rhs[piv[c]];
        for (std::size_t c2 = c + 1; c2 < k; ++c2) s -= A[piv[c]][c2] * lam[c2];
        lam[c] = s / A[piv[c]][c];
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < d; ++c) out.center[c] += lam[i] * v[i][c];
    out.radius = dist(out.center, *b[0]);
    return out;
}

inline Ball welzl(std::vector<const Point*>& pts, std::size_t n,
                  std::vector<const Point*>& boundary, std::size_t dim,
                  double tol) {
    if (n == 0 || boundary.size() == dim + 1) {
        std::vector<const Point*> b = boundary;
        for (;;) {
            auto ball = ball_from_boundary(b);
            if (ball) return *ball;
            b.pop_back();  // affinely dependent; drop and retry
        }
    }
    Ball b = welzl(pts, n - 1, boundary, dim, tol);
    const Point* p = pts[n - 1];
    if (b.radius >= 0.0 && dist(*p, b.center) <= b.radius + tol) return b;
    boundary.push_back(p);
    b = welzl(pts, n - 1, boundary, dim, tol);
    boundary.pop_back();
    // Move-to-front keeps the expected recursion shallow.
    for (std::size_t i = n - 1; i > 0; --i) pts[i] = pts[i - 1];
    pts[0] = p;
    return b;
}

}  // namespace detail

// Minimal enclosing ball. The support set is canonical: among all boundary
// subsets that reproduce the ball, the lexicographically smallest index set
// is chosen, and the returned ball is recomputed from it so that equal
// support sets yield bit-identical balls.
inline SebResult seb2(const PointSet& pts) {
    const std::size_t d = point_set_dim(pts);
    require(d == 2 || d == 3, "seb2 requires dimension 2 or 3");
    const double tol = 1e-12 * std::max(1.0, coord_scale(pts));

    std::vector<const Point*> order(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order[i] = &pts[i];
    SeededRng shuffle_rng(0x5eb2u, pts.size());
    for (std::size_t i = pts.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.index(i)]);

    std::vector<const Point*> boundary;
    Ball ball = detail::welzl(order, order.size(), boundary, d, tol);

    // Candidate support: points near the boundary, in index order.
    const double btol = std::max(1e-9, 1e-9 * ball.radius);
    std::vector<std::size_t> on_boundary;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (std::abs(dist(pts[i], ball.center) - ball.radius) <= btol)
            on_boundary.push_back(i);

    auto check_subset = [&](const std::vector<std::size_t>& idx) -> std::optional<Ball> {
        std::vector<const Point*> b;
        b.reserve(idx.size());
        for (std::size_t i : idx) b.push_back(&pts[i]);
        auto cand = detail::ball_from_boundary(b);
        if (!cand) return std::nullopt;
        if (std::abs(cand->radius - ball.radius) > btol) return std::nullopt;
        for (const Point& p : pts)
            if (dist(p, cand->center) > cand->radius + btol) return std::nullopt;
        return cand;
    };

    SebResult res;
    for (std::size_t sz = 1; sz <= std::min<std::size_t>(d + 1, on_boundary.size()); ++sz) {
        std::vector<std::size_t> comb(sz);
        std::vector<std::size_t> pick(sz, 0);
        // Lexicographic subset enumeration over on_boundary.
        std::function<bool(std::size_t, std::size_t)> rec =
            [&](std::size_t depth, std::size_t start) -> bool {
            if (depth == sz) {
                if (auto b = check_subset(comb)) {
                    res.ball = *b;
                    res.support = comb;
                    return true;
                }
                return false;
            }
            for (std::size_t i = start; i < on_boundary.size(); ++i) {
                comb[depth] = on_boundary[i];
                if (rec(depth + 1, i + 1)) return true;
            }
            return false;
        };
        if (rec(0, 0)) return res;
    }
    // Numerical fallback: keep Welzl's ball with the near-boundary points.
    res.ball = ball;
    res.support = on_boundary;
    if (res.support.size() > d + 1) res.support.resize(d + 1);
    return res;
}

// ---------------------------------------------------------------------------
// Axis-aligned bounding box statistics

struct Box {
    Point lo, hi;

    bool contains(const Point& p, double tol = 0.0) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
        return true;
    }
    bool contains_strict(const Point& p) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (p[i] <= lo[i] || p[i] >= hi[i]) return false;
        return true;
    }
};

struct AabbStats {
    Box box;
    std::vector<double> widths;
    double boundary_measure = 0.0;  // perimeter for d=2, surface area for d=3
    double volume = 0.0;
};

inline AabbStats aabb_stats(const PointSet& pts) {
    const std::size_t d = point_set_dim(pts);
    AabbStats s;
    s.box.lo = pts[0];
    s.box.hi = pts[0];
    for (const Point& p : pts)
        for (std::size_t i = 0; i < d; ++i) {
            s.box.lo[i] = std::min(s.box.lo[i], p[i]);
            s.box.hi[i] = std::max(s.box.hi[i], p[i]);
        }
    s.widths.resize(d);
    for (std::size_t i = 0; i < d; ++i) s.widths[i] = s.box.hi[i] - s.box.lo[i];
    s.volume = 1.0;
    for (double w : s.widths) s.volume *= w;
    // (d-1)-volume of the boundary: 2 * sum_i prod_{j != i} w_j.
    s.boundary_measure = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double face = 1.0;
        for (std::size_t j = 0; j < d; ++j)
            if (j != i) face *= s.widths[j];
        s.boundary_measure += 2.0 * face;
    }
    return s;
}

// ---------------------------------------------------------------------------
// 2D convex hull (monotone chain) and hull statistics

inline double cross2(const Point& o, const Point& a, const Point& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Hull vertices in counterclockwise order; collinear edge points dropped.
inline PointSet convex_hull_2d(PointSet pts) {
    require(!pts.empty(), "empty point set");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    PointSet h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

struct HullStats {
    double area = 0.0;
    double perimeter = 0.0;
    PointSet hull;
};

inline HullStats chull_stats_2d(const PointSet& pts) {
    const std::size_t d = point_set_dim(pts);
    require(d == 2, "chull_stats_2d requires dimension 2");
    HullStats s;
    s.hull = convex_hull_2d(pts);
    const std::size_t n = s.hull.size();
    if (n == 1) return s;  // area 0, perimeter 0
    if (n == 2) {
        // Degenerate hull traverses the segment twice.
        s.perimeter = 2.0 * dist(s.hull[0], s.hull[1]);
        return s;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = s.hull[i];
        const Point& b = s.hull[(i + 1) % n];
        s.area += a[0] * b[1] - b[0] * a[1];
        s.perimeter += dist(a, b);
    }
    s.area = std::abs(s.area) / 2.0;
    return s;
}

// Closed containment check against a convex polygon in CCW order.
inline bool point_in_convex_polygon(const Point& p, const PointSet& poly,
                                    double tol = 1e-12) {
    const std::size_t n = poly.size();
    if (n == 0) return false;
    if (n == 1) return dist(p, poly[0]) <= tol;
    for (std::size_t i = 0; i < n; ++i) {
        if (cross2(poly[i], poly[(i + 1) % n], p) < -tol) return false;
    }
    return true;
}

inline double polygon_area(const PointSet& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return a / 2.0;
}

}  // namespace uex
