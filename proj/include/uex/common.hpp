#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace uex {

// Runtime-dimensional point. Dimension is carried by the container size.
using Point = std::vector<double>;
using PointSet = std::vector<Point>;

// Library errors surface as exceptions; the CLI maps them to exit code 1.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw error(msg);
}

inline double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

inline double dist2(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist(const Point& a, const Point& b) { return std::sqrt(dist2(a, b)); }

inline Point sub(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Point add(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Point scale(const Point& a, double s) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

inline bool all_finite(const Point& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

// Unit vector on S^{d-1}; normalized on construction.
struct Direction {
    Point u;

    explicit Direction(Point v) : u(std::move(v)) {
        require(!u.empty(), "direction must have dimension >= 1");
        require(all_finite(u), "direction coordinates must be finite");
        const double n = norm(u);
        require(n > 0.0, "direction must be nonzero");
        for (double& c : u) c /= n;
    }

    std::size_t dim() const { return u.size(); }

    Direction negated() const {
        Point v = u;
        for (double& c : v) c = -c;
        return Direction(std::move(v));
    }
};

inline std::size_t point_set_dim(const PointSet& pts) {
    require(!pts.empty(), "empty point set");
    const std::size_t d = pts.front().size();
    for (const Point& p : pts)
        require(p.size() == d, "dimension mismatch in point set");
    return d;
}

// Largest coordinate magnitude; used to scale absolute tolerances.
inline double coord_scale(const PointSet& pts) {
    double s = 0.0;
    for (const Point& p : pts)
        for (double v : p) s = std::max(s, std::abs(v));
    return s > 0.0 ? s : 1.0;
}

}  // namespace uex
