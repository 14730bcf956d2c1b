#pragma once

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uex/common.hpp"
#include "uex/geometry.hpp"
#include "uex/rng.hpp"

namespace uex {

enum class DistKind { discrete, gaussian, uniform_disk, uniform_polygon };

inline const char* kind_name(DistKind k) {
    switch (k) {
        case DistKind::discrete: return "discrete";
        case DistKind::gaussian: return "gaussian";
        case DistKind::uniform_disk: return "uniform-disk";
        case DistKind::uniform_polygon: return "uniform-polygon";
    }
    return "?";
}

struct WeightedSupportPoint {
    Point p;
    double w = 0.0;
};

// Marginal location distribution of one uncertain point.
struct PointDistribution {
    DistKind kind = DistKind::discrete;
    std::size_t dim = 0;

    std::vector<WeightedSupportPoint> support;  // discrete
    Point mean;                                 // gaussian
    std::vector<double> sigma;                  // gaussian, per axis
    Point center;                               // uniform-disk
    double radius = 0.0;                        // uniform-disk
    PointSet vertices;                          // uniform-polygon, convex CCW

    bool bounded() const { return kind != DistKind::gaussian; }
};

namespace detail {

inline void validate_distribution(const PointDistribution& d, std::size_t index) {
    const std::string where = "point " + std::to_string(index) + ": ";
    require(d.dim >= 1, where + "dimension must be >= 1");
    switch (d.kind) {
        case DistKind::discrete: {
            require(!d.support.empty(), where + "discrete support must be nonempty");
            double sum = 0.0;
            for (const auto& s : d.support) {
                require(s.p.size() == d.dim, where + "support point dimension mismatch");
                require(all_finite(s.p), where + "support point must be finite");
                require(s.w > 0.0, where + "weights must be positive");
                sum += s.w;
            }
            require(std::abs(sum - 1.0) <= 1e-9, where + "weights must sum to 1");
            break;
        }
        case DistKind::gaussian: {
            require(d.mean.size() == d.dim, where + "mean dimension mismatch");
            require(all_finite(d.mean), where + "mean must be finite");
            require(d.sigma.size() == d.dim, where + "sigma dimension mismatch");
            for (double s : d.sigma) require(s > 0.0, where + "sigma must be positive");
            break;
        }
        case DistKind::uniform_disk: {
            require(d.center.size() == d.dim, where + "center dimension mismatch");
            require(all_finite(d.center), where + "center must be finite");
            require(d.radius > 0.0, where + "radius must be positive");
            break;
        }
        case DistKind::uniform_polygon: {
            require(d.dim == 2, where + "uniform-polygon requires dimension 2");
            require(d.vertices.size() >= 3, where + "polygon needs at least 3 vertices");
            for (const Point& v : d.vertices) {
                require(v.size() == 2, where + "polygon vertex dimension mismatch");
                require(all_finite(v), where + "polygon vertex must be finite");
            }
            const double area = polygon_area(d.vertices);
            require(area > 0.0, where + "polygon must be non-degenerate and counterclockwise");
            double s = 1.0;
            for (const Point& v : d.vertices) s = std::max({s, std::abs(v[0]), std::abs(v[1])});
            const double tol = 1e-12 * s * s;
            const std::size_t n = d.vertices.size();
            for (std::size_t i = 0; i < n; ++i) {
                const double c = cross2(d.vertices[i], d.vertices[(i + 1) % n],
                                        d.vertices[(i + 2) % n]);
                require(c > -tol, where + "polygon must be convex");
            }
            break;
        }
    }
}

}  // namespace detail

// mu_P: independent per-point distributions; the joint density is the
// product of the marginals.
struct UncertainPointSet {
    std::size_t dim = 0;
    std::vector<PointDistribution> points;

    std::size_t size() const { return points.size(); }

    void validate() const {
        require(dim >= 1, "model dimension must be >= 1");
        require(!points.empty(), "model must contain at least one point");
        for (std::size_t i = 0; i < points.size(); ++i) {
            require(points[i].dim == dim,
                    "point " + std::to_string(i) + ": dimension mismatch with model");
            detail::validate_distribution(points[i], i);
        }
    }
};

// ---------------------------------------------------------------------------
// Sampling

inline Point sample_point(const PointDistribution& d, SeededRng& rng) {
    switch (d.kind) {
        case DistKind::discrete: {
            const double u = rng.uniform01();
            double acc = 0.0;
            for (const auto& s : d.support) {
                acc += s.w;
                if (u < acc) return s.p;
            }
            return d.support.back().p;
        }
        case DistKind::gaussian: {
            Point p(d.dim);
            for (std::size_t i = 0; i < d.dim; ++i)
                p[i] = rng.normal(d.mean[i], d.sigma[i]);
            return p;
        }
        case DistKind::uniform_disk: {
            // Radius component via inverse CDF, direction uniform.
            const Direction u = rng.direction(d.dim);
            const double r =
                d.radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d.dim));
            Point p(d.dim);
            for (std::size_t i = 0; i < d.dim; ++i) p[i] = d.center[i] + r * u.u[i];
            return p;
        }
        case DistKind::uniform_polygon: {
            // Fan triangulation, area-weighted triangle pick, barycentric draw.
            const std::size_t n = d.vertices.size();
            double total = 0.0;
            std::vector<double> areas(n - 2);
            for (std::size_t i = 0; i + 2 < n; ++i) {
                areas[i] = 0.5 * std::abs(cross2(d.vertices[0], d.vertices[i + 1],
                                                 d.vertices[i + 2]));
                total += areas[i];
            }
            double pick = rng.uniform01() * total;
            std::size_t t = 0;
            while (t + 1 < areas.size() && pick > areas[t]) pick -= areas[t], ++t;
            const Point& a = d.vertices[0];
            const Point& b = d.vertices[t + 1];
            const Point& c = d.vertices[t + 2];
            double u = rng.uniform01(), v = rng.uniform01();
            if (u + v > 1.0) { u = 1.0 - u; v = 1.0 - v; }
            return {a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
                    a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1])};
        }
    }
    throw error("unreachable distribution kind");
}

inline PointSet sample_point_set(const UncertainPointSet& model, SeededRng& rng) {
    PointSet q;
    q.reserve(model.size());
    for (const auto& d : model.points) q.push_back(sample_point(d, rng));
    return q;
}

// ---------------------------------------------------------------------------
// JSON serialization

inline UncertainPointSet parse_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed model document: ") + e.what());
    }
    UncertainPointSet m;
    try {
        require(j.contains("dim") && j.contains("points"),
                "model document needs \"dim\" and \"points\"");
        m.dim = j.at("dim").get<std::size_t>();
        std::size_t index = 0;
        for (const auto& jp : j.at("points")) {
            const std::string where = "point " + std::to_string(index) + ": ";
            PointDistribution d;
            d.dim = m.dim;
            const std::string kind = jp.at("kind").get<std::string>();
            if (kind == "discrete") {
                d.kind = DistKind::discrete;
                for (const auto& js : jp.at("support"))
                    d.support.push_back(
                        {js.at("p").get<Point>(), js.at("w").get<double>()});
            } else if (kind == "gaussian") {
                d.kind = DistKind::gaussian;
                d.mean = jp.at("mean").get<Point>();
                const auto& js = jp.at("sigma");
                if (js.is_number())
                    d.sigma.assign(m.dim, js.get<double>());
                else
                    d.sigma = js.get<std::vector<double>>();
            } else if (kind == "uniform-disk") {
                d.kind = DistKind::uniform_disk;
                d.center = jp.at("center").get<Point>();
                d.radius = jp.at("radius").get<double>();
            } else if (kind == "uniform-polygon") {
                d.kind = DistKind::uniform_polygon;
                d.vertices = jp.at("vertices").get<PointSet>();
            } else {
                throw error(where + "unknown kind \"" + kind + "\"");
            }
            m.points.push_back(std::move(d));
            ++index;
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed model document: ") + e.what());
    }
    m.validate();
    return m;
}

inline std::string serialize_model(const UncertainPointSet& m) {
    nlohmann::json j;
    j["dim"] = m.dim;
    j["points"] = nlohmann::json::array();
    for (const auto& d : m.points) {
        nlohmann::json jp;
        jp["kind"] = kind_name(d.kind);
        switch (d.kind) {
            case DistKind::discrete: {
                jp["support"] = nlohmann::json::array();
                for (const auto& s : d.support)
                    jp["support"].push_back({{"p", s.p}, {"w", s.w}});
                break;
            }
            case DistKind::gaussian:
                jp["mean"] = d.mean;
                jp["sigma"] = d.sigma;
                break;
            case DistKind::uniform_disk:
                jp["center"] = d.center;
                jp["radius"] = d.radius;
                break;
            case DistKind::uniform_polygon:
                jp["vertices"] = d.vertices;
                break;
        }
        j["points"].push_back(std::move(jp));
    }
    return j.dump(2);
}

inline UncertainPointSet load_model(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

// ---------------------------------------------------------------------------
// Exact enumeration for all-discrete models

struct SupportOutcome {
    PointSet points;
    double prob = 0.0;
};

inline std::vector<SupportOutcome> enumerate_support(
    const UncertainPointSet& model, std::size_t max_outcomes = 10'000'000) {
    model.validate();
    std::size_t total = 1;
    for (const auto& d : model.points) {
        require(d.kind == DistKind::discrete,
                "enumerate_support requires all-discrete model");
        require(d.support.size() <= max_outcomes / total,
                "enumerate_support: product of support sizes exceeds bound");
        total *= d.support.size();
    }
    std::vector<SupportOutcome> out;
    out.reserve(total);
    const std::size_t n = model.size();
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        SupportOutcome o;
        o.prob = 1.0;
        o.points.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = model.points[i].support[idx[i]];
            o.points.push_back(s.p);
            o.prob *= s.w;
        }
        out.push_back(std::move(o));
        std::size_t i = 0;
        while (i < n && ++idx[i] == model.points[i].support.size()) idx[i++] = 0;
        if (i == n) break;
    }
    return out;
}

}  // namespace uex
