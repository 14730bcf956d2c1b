#pragma once

#include <deque>
#include <map>

#include "uex/quantization.hpp"

namespace uex {

// ---------------------------------------------------------------------------
// Summarizing shape families

enum class ShapeFamily { seb2_ball, aabb_box };

inline const char* family_name(ShapeFamily f) {
    return f == ShapeFamily::seb2_ball ? "seb2" : "aabb";
}

inline ShapeFamily parse_family(const std::string& s) {
    if (s == "seb2" || s == "seb2-ball") return ShapeFamily::seb2_ball;
    if (s == "aabb" || s == "aabb-box") return ShapeFamily::aabb_box;
    throw error("unknown shape family \"" + s + "\"");
}

struct SummarizingShape {
    ShapeFamily family = ShapeFamily::seb2_ball;
    Ball ball;
    Box box;

    // Closed containment; boundary counts as inside.
    bool contains(const Point& p) const {
        if (family == ShapeFamily::seb2_ball)
            return dist2(p, ball.center) <= ball.radius * ball.radius * (1.0 + 1e-12);
        return box.contains(p);
    }
};

inline SummarizingShape summarize(ShapeFamily family, const PointSet& q) {
    SummarizingShape s;
    s.family = family;
    if (family == ShapeFamily::seb2_ball)
        s.ball = seb2(q).ball;
    else
        s.box = aabb_stats(q).box;
    return s;
}

// ---------------------------------------------------------------------------
// ShapeSet: the eps-sip estimator

struct SipParams {
    double epsilon = 0.1;
    double delta = 0.05;
    std::size_t m_override = 0;
    double sample_constant = 0.5;

    std::size_t trials() const {
        if (m_override) return m_override;
        const double m = std::ceil((sample_constant / (epsilon * epsilon)) *
                                   std::log(1.0 / (epsilon * delta)));
        return std::max<std::size_t>(1, static_cast<std::size_t>(m));
    }
};

struct ShapeSet {
    ShapeFamily family = ShapeFamily::seb2_ball;
    std::size_t dim = 0;
    SipParams params;
    std::uint64_t seed = 0;
    std::vector<SummarizingShape> shapes;
    std::vector<PointSet> generating_sets;  // test mode only
};

inline ShapeSet build_sip(const UncertainPointSet& model, ShapeFamily family,
                          const SipParams& params, std::uint64_t seed,
                          bool test_mode = false, unsigned threads = 1) {
    model.validate();
    require(params.epsilon > 0.0 && params.epsilon < 1.0, "epsilon must be in (0,1)");
    require(params.delta > 0.0 && params.delta < 1.0, "delta must be in (0,1)");
    if (family == ShapeFamily::seb2_ball)
        require(model.dim == 2 || model.dim == 3, "seb2 family requires dimension 2 or 3");
    ShapeSet out;
    out.family = family;
    out.dim = model.dim;
    out.params = params;
    out.seed = seed;
    const std::size_t m = params.trials();
    out.shapes.resize(m);
    if (test_mode) out.generating_sets.resize(m);
    parallel_for(m, threads, [&](std::size_t j) {
        SeededRng rng(seed, j);
        PointSet q = sample_point_set(model, rng);
        out.shapes[j] = summarize(family, q);
        if (test_mode) out.generating_sets[j] = std::move(q);
    });
    return out;
}

inline double eval_sip(const ShapeSet& s, const Point& x) {
    require(x.size() == s.dim, "query dimension mismatch");
    require(!s.shapes.empty(), "empty shape set");
    std::size_t count = 0;
    for (const auto& shape : s.shapes) count += shape.contains(x);
    return static_cast<double>(count) / static_cast<double>(s.shapes.size());
}

// ---------------------------------------------------------------------------
// Grid evaluation and isoline extraction (d = 2)

struct GridField {
    Box bbox;                    // 2D query window
    std::size_t resolution = 0;  // nodes per axis
    std::vector<double> values;  // row-major, y-major rows

    double at(std::size_t ix, std::size_t iy) const {
        return values[iy * resolution + ix];
    }
    double x_at(std::size_t ix) const {
        return bbox.lo[0] + (bbox.hi[0] - bbox.lo[0]) * static_cast<double>(ix) /
                                static_cast<double>(resolution - 1);
    }
    double y_at(std::size_t iy) const {
        return bbox.lo[1] + (bbox.hi[1] - bbox.lo[1]) * static_cast<double>(iy) /
                                static_cast<double>(resolution - 1);
    }
};

inline GridField sip_grid(const ShapeSet& s, const Box& bbox, std::size_t resolution,
                          unsigned threads = 1) {
    require(s.dim == 2, "grid evaluation requires dimension 2");
    require(resolution >= 8, "resolution must be >= 8");
    require(bbox.lo.size() == 2 && bbox.hi.size() == 2, "bbox must be 2D");
    require(bbox.hi[0] > bbox.lo[0] && bbox.hi[1] > bbox.lo[1], "bbox is degenerate");
    GridField g;
    g.bbox = bbox;
    g.resolution = resolution;
    g.values.assign(resolution * resolution, 0.0);
    parallel_for(resolution, threads, [&](std::size_t iy) {
        const double y = g.y_at(iy);
        for (std::size_t ix = 0; ix < resolution; ++ix)
            g.values[iy * resolution + ix] = eval_sip(s, {g.x_at(ix), y});
    });
    return g;
}

using Polyline = std::vector<Point>;  // closed: first == last

struct IsolineSet {
    std::vector<double> levels;                   // strictly decreasing
    std::vector<std::vector<Polyline>> isolines;  // per level
    std::size_t resolution = 0;
    Box bbox;
};

namespace detail {

// Marching squares over the grid. Segment endpoints are keyed by the grid
// edge they lie on, which makes loop assembly exact. Chains that terminate
// on the window frame are closed by walking the frame, so a level curve that
// never enters the window produces nothing and every emitted polyline is
// closed.
inline std::vector<Polyline> marching_squares(const GridField& g, double level) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.resolution);
    const double dx = (g.bbox.hi[0] - g.bbox.lo[0]) / static_cast<double>(n - 1);
    const double dy = (g.bbox.hi[1] - g.bbox.lo[1]) / static_cast<double>(n - 1);
    auto value = [&](std::ptrdiff_t ix, std::ptrdiff_t iy) -> double {
        return g.at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
    };
    auto node_x = [&](std::ptrdiff_t ix) { return g.bbox.lo[0] + dx * static_cast<double>(ix); };
    auto node_y = [&](std::ptrdiff_t iy) { return g.bbox.lo[1] + dy * static_cast<double>(iy); };

    // Edge key: horizontal edges (node (ix,iy))-(ix+1,iy) id 2*(iy*n+ix),
    // vertical edges (ix,iy)-(ix,iy+1) id 2*(iy*n+ix)+1.
    auto hkey = [&](std::ptrdiff_t ix, std::ptrdiff_t iy) { return 2 * (iy * n + ix); };
    auto vkey = [&](std::ptrdiff_t ix, std::ptrdiff_t iy) { return 2 * (iy * n + ix) + 1; };

    auto interp = [&](double a, double b) {
        const double t = (level - a) / (b - a);
        return std::min(1.0, std::max(0.0, t));
    };

    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> segments;  // edge-key pairs
    std::map<std::ptrdiff_t, Point> edge_point;

    for (std::ptrdiff_t iy = 0; iy + 1 < n; ++iy) {
        for (std::ptrdiff_t ix = 0; ix + 1 < n; ++ix) {
            const double v00 = value(ix, iy), v10 = value(ix + 1, iy);
            const double v01 = value(ix, iy + 1), v11 = value(ix + 1, iy + 1);
            int mask = 0;
            if (v00 >= level) mask |= 1;
            if (v10 >= level) mask |= 2;
            if (v11 >= level) mask |= 4;
            if (v01 >= level) mask |= 8;
            if (mask == 0 || mask == 15) continue;

            auto bottom = [&]() {
                edge_point[hkey(ix, iy)] = {node_x(ix) + dx * interp(v00, v10), node_y(iy)};
                return hkey(ix, iy);
            };
            auto top = [&]() {
                edge_point[hkey(ix, iy + 1)] = {node_x(ix) + dx * interp(v01, v11), node_y(iy + 1)};
                return hkey(ix, iy + 1);
            };
            auto left = [&]() {
                edge_point[vkey(ix, iy)] = {node_x(ix), node_y(iy) + dy * interp(v00, v01)};
                return vkey(ix, iy);
            };
            auto right = [&]() {
                edge_point[vkey(ix + 1, iy)] = {node_x(ix + 1), node_y(iy) + dy * interp(v10, v11)};
                return vkey(ix + 1, iy);
            };
            auto emit = [&](std::ptrdiff_t a, std::ptrdiff_t b) { segments.emplace_back(a, b); };

            switch (mask) {
                case 1: case 14: emit(left(), bottom()); break;
                case 2: case 13: emit(bottom(), right()); break;
                case 3: case 12: emit(left(), right()); break;
                case 4: case 11: emit(right(), top()); break;
                case 6: case 9: emit(bottom(), top()); break;
                case 7: case 8: emit(left(), top()); break;
                case 5: case 10: {
                    // Saddle: resolve by the average of the four corners.
                    const double c = 0.25 * (v00 + v10 + v01 + v11);
                    const bool center_in = c >= level;
                    if ((mask == 5) == center_in) {
                        emit(left(), bottom());
                        emit(right(), top());
                    } else {
                        emit(left(), top());
                        emit(bottom(), right());
                    }
                    break;
                }
            }
        }
    }

    // Assemble segments into chains by walking shared edge keys. Chains are
    // extended from both ends so open contours become a single chain.
    std::multimap<std::ptrdiff_t, std::size_t> by_edge;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        by_edge.emplace(segments[i].first, i);
        by_edge.emplace(segments[i].second, i);
    }
    std::vector<bool> used(segments.size(), false);
    auto take_next = [&](std::ptrdiff_t key, std::size_t& out) {
        auto [b, e] = by_edge.equal_range(key);
        for (auto it = b; it != e; ++it)
            if (!used[it->second]) {
                out = it->second;
                return true;
            }
        return false;
    };

    // Perimeter coordinate for closing open chains along the window frame,
    // counterclockwise from the bottom-left corner.
    const double w = g.bbox.hi[0] - g.bbox.lo[0];
    const double h = g.bbox.hi[1] - g.bbox.lo[1];
    const double frame_tol = 1e-9 * std::max(w, h);
    auto frame_t = [&](const Point& p) -> double {
        if (std::abs(p[1] - g.bbox.lo[1]) <= frame_tol) return p[0] - g.bbox.lo[0];
        if (std::abs(p[0] - g.bbox.hi[0]) <= frame_tol) return w + p[1] - g.bbox.lo[1];
        if (std::abs(p[1] - g.bbox.hi[1]) <= frame_tol) return w + h + g.bbox.hi[0] - p[0];
        return 2.0 * w + h + g.bbox.hi[1] - p[1];
    };

    std::vector<Polyline> loops;
    for (std::size_t start = 0; start < segments.size(); ++start) {
        if (used[start]) continue;
        used[start] = true;
        std::deque<std::ptrdiff_t> chain{segments[start].first, segments[start].second};
        for (;;) {  // forward
            std::size_t next;
            if (!take_next(chain.back(), next)) break;
            used[next] = true;
            chain.push_back(segments[next].first == chain.back() ? segments[next].second
                                                                 : segments[next].first);
            if (chain.back() == chain.front()) break;
        }
        if (chain.back() != chain.front()) {
            for (;;) {  // backward
                std::size_t next;
                if (!take_next(chain.front(), next)) break;
                used[next] = true;
                chain.push_front(segments[next].first == chain.front()
                                     ? segments[next].second
                                     : segments[next].first);
            }
        }
        Polyline loop;
        loop.reserve(chain.size() + 5);
        for (std::ptrdiff_t key : chain) loop.push_back(edge_point.at(key));
        if (chain.front() != chain.back()) {
            // Close along the frame, inserting the corners passed on the way.
            const double t_end = frame_t(loop.back());
            const double t_start = frame_t(loop.front());
            double span = t_start - t_end;
            if (span <= 0.0) span += 2.0 * (w + h);
            const Point corners[4] = {{g.bbox.hi[0], g.bbox.lo[1]},
                                      {g.bbox.hi[0], g.bbox.hi[1]},
                                      {g.bbox.lo[0], g.bbox.hi[1]},
                                      {g.bbox.lo[0], g.bbox.lo[1]}};
            const double corner_t[4] = {w, w + h, 2.0 * w + h, 2.0 * (w + h)};
            std::vector<std::pair<double, Point>> inserts;
            for (int c = 0; c < 4; ++c) {
                double rel = corner_t[c] - t_end;
                if (rel <= 0.0) rel += 2.0 * (w + h);
                if (rel < span) inserts.emplace_back(rel, corners[c]);
            }
            std::sort(inserts.begin(), inserts.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (auto& [rel, p] : inserts) loop.push_back(p);
            loop.push_back(loop.front());
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

}  // namespace detail

inline IsolineSet extract_isolines(const GridField& g, std::vector<double> levels) {
    require(!levels.empty(), "empty level list");
    std::sort(levels.begin(), levels.end(), std::greater<double>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double l : levels)
        require(l > 0.0 && l < 1.0, "levels must lie in (0,1)");
    IsolineSet out;
    out.levels = levels;
    out.resolution = g.resolution;
    out.bbox = g.bbox;
    for (double l : levels) out.isolines.push_back(detail::marching_squares(g, l));
    return out;
}

inline IsolineSet grid_and_isolines(const ShapeSet& s, const Box& bbox,
                                    std::size_t resolution, std::vector<double> levels,
                                    unsigned threads = 1) {
    return extract_isolines(sip_grid(s, bbox, resolution, threads), std::move(levels));
}

inline std::vector<double> default_isoline_levels() { return {0.9, 0.7, 0.5, 0.3, 0.1}; }

// ---------------------------------------------------------------------------
// Output writers

inline void write_grid_csv(std::ostream& os, const GridField& g, const CsvHeader& h) {
    write_csv_header(os, h);
    os << std::setprecision(17) << "x,y,sip\n";
    for (std::size_t iy = 0; iy < g.resolution; ++iy)
        for (std::size_t ix = 0; ix < g.resolution; ++ix)
            os << g.x_at(ix) << "," << g.y_at(iy) << "," << g.at(ix, iy) << "\n";
}

inline void write_isolines_svg(std::ostream& os, const IsolineSet& iso) {
    const double w = iso.bbox.hi[0] - iso.bbox.lo[0];
    const double h = iso.bbox.hi[1] - iso.bbox.lo[1];
    os << std::setprecision(10)
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << iso.bbox.lo[0]
       << " " << iso.bbox.lo[1] << " " << w << " " << h << "\">\n";
    for (std::size_t li = 0; li < iso.levels.size(); ++li) {
        os << "  <g fill=\"none\" stroke=\"black\" stroke-width=\"" << 0.002 * std::max(w, h)
           << "\" data-level=\"" << iso.levels[li] << "\">\n";
        for (const Polyline& loop : iso.isolines[li]) {
            os << "    <path data-level=\"" << iso.levels[li] << "\" d=\"";
            for (std::size_t i = 0; i < loop.size(); ++i) {
                // Flip y so larger y renders upward.
                const double y = iso.bbox.lo[1] + iso.bbox.hi[1] - loop[i][1];
                os << (i == 0 ? "M" : "L") << loop[i][0] << " " << y << " ";
            }
            os << "Z\"/>\n";
        }
        os << "  </g>\n";
    }
    os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Approximate center point (Appendix-style two-stage construction)

struct CenterPoint {
    Point qbar;
    PointSet pbar;  // per-distribution approximate centers
};

namespace detail {

// Exact halfspace depth of x in S for d=2. The minimizing halfplane can be
// rotated until its boundary passes through a sample point, so it suffices to
// scan the strict side counts of every line through x and a sample point.
// Stops early (returning a value <= abort_at) once the depth provably cannot
// exceed abort_at.
inline std::size_t halfspace_depth_2d(const Point& x, const PointSet& s,
                                      std::size_t abort_at = 0) {
    std::vector<std::pair<double, double>> rel;
    rel.reserve(s.size());
    std::size_t at_x = 0;
    for (const Point& p : s) {
        const double dx = p[0] - x[0], dy = p[1] - x[1];
        if (dx == 0.0 && dy == 0.0)
            ++at_x;
        else
            rel.emplace_back(dx, dy);
    }
    if (rel.empty()) return at_x;

    // Cheap upper bound from the four axis halfplanes.
    std::size_t xp = 0, xn = 0, yp = 0, yn = 0;
    for (const auto& [dx, dy] : rel) {
        xp += dx >= 0.0;
        xn += dx <= 0.0;
        yp += dy >= 0.0;
        yn += dy <= 0.0;
    }
    std::size_t depth = std::min(std::min(xp, xn), std::min(yp, yn));
    if (depth + at_x <= abort_at) return depth + at_x;

    for (const auto& [ax, ay] : rel) {
        // Points exactly on the scan line split by ray; the rotating boundary
        // keeps one ray's worth, so they contribute min(on+, on-).
        const double a2 = ax * ax + ay * ay;
        std::size_t pos = 0, neg = 0, on_plus = 0, on_minus = 0;
        for (const auto& [bx, by] : rel) {
            const double cr = ax * by - ay * bx;
            const double tol = 1e-12 * a2 + 1e-12 * (bx * bx + by * by);
            if (cr > tol)
                ++pos;
            else if (cr < -tol)
                ++neg;
            else if (ax * bx + ay * by > 0.0)
                ++on_plus;
            else
                ++on_minus;
        }
        depth = std::min(depth, std::min(pos, neg) + std::min(on_plus, on_minus));
        if (depth + at_x <= abort_at) return depth + at_x;
    }
    return depth + at_x;
}

inline std::size_t net_depth(const Point& x, const PointSet& s,
                             const std::vector<Direction>& dirs,
                             std::size_t abort_at = 0) {
    std::size_t depth = s.size();
    for (const Direction& u : dirs) {
        std::size_t cnt = 0;
        for (const Point& p : s) cnt += dot(sub(p, x), u.u) >= 0.0;
        depth = std::min(depth, cnt);
        if (depth <= abort_at) return depth;
    }
    return depth;
}

inline bool segment_intersection_2d(const Point& a, const Point& b, const Point& c,
                                    const Point& e, Point& out) {
    const double d1 = cross2(a, b, c), d2 = cross2(a, b, e);
    const double d3 = cross2(c, e, a), d4 = cross2(c, e, b);
    if (((d1 > 0) == (d2 > 0)) || ((d3 > 0) == (d4 > 0))) return false;
    const double denom = d1 - d2;
    if (denom == 0.0) return false;
    const double t = d1 / denom;
    out = {c[0] + t * (e[0] - c[0]), c[1] + t * (e[1] - c[1])};
    return true;
}

// Candidate of maximum halfspace depth: candidates are the sample points
// plus all pairwise segment intersections (d=2) or segment midpoints (d=3,
// where generic segments do not intersect).
inline Point approx_center(const PointSet& s, const std::vector<Direction>& net3d) {
    const std::size_t d = s[0].size();
    PointSet candidates = s;
    if (d == 2) {
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                for (std::size_t a = i; a < s.size(); ++a)
                    for (std::size_t b = a + 1; b < s.size(); ++b) {
                        if (a == i && b <= j) continue;
                        Point p;
                        if (segment_intersection_2d(s[i], s[j], s[a], s[b], p))
                            candidates.push_back(std::move(p));
                    }
    } else {
        Point centroid(d, 0.0);
        for (const Point& p : s) centroid = add(centroid, p);
        candidates.push_back(scale(centroid, 1.0 / static_cast<double>(s.size())));
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                candidates.push_back(scale(add(s[i], s[j]), 0.5));
    }
    std::size_t best_depth = 0;
    Point best = candidates.front();
    for (const Point& c : candidates) {
        const std::size_t depth = d == 2 ? halfspace_depth_2d(c, s, best_depth)
                                         : net_depth(c, s, net3d, best_depth);
        if (depth > best_depth) { best_depth = depth; best = c; }
    }
    return best;
}

}  // namespace detail

inline CenterPoint center_point(const UncertainPointSet& model, std::uint64_t seed,
                                std::size_t sample_size = 32) {
    model.validate();
    require(model.dim == 2 || model.dim == 3, "center_point requires dimension 2 or 3");
    require(sample_size >= 4, "sample size must be >= 4");
    std::vector<Direction> net3d;
    if (model.dim == 3) {
        SeededRng dr(0xd1f3c7ULL, 0);
        net3d.reserve(1000);
        for (int i = 0; i < 1000; ++i) net3d.push_back(dr.direction(3));
    }
    CenterPoint out;
    out.pbar.reserve(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        SeededRng rng(seed, 0xc3000000ULL + i);
        PointSet s;
        s.reserve(sample_size);
        for (std::size_t j = 0; j < sample_size; ++j)
            s.push_back(sample_point(model.points[i], rng));
        out.pbar.push_back(detail::approx_center(s, net3d));
    }
    out.qbar = detail::approx_center(out.pbar, net3d);
    return out;
}

}  // namespace uex
