#pragma once

#include <cstdio>
#include <set>

#include "uex/quantization.hpp"

namespace uex {

// ---------------------------------------------------------------------------
// Direction nets on S^{d-1} (half sphere; argmin covers the antipodes)

namespace detail {

// Net over the unit directions spanned by `axes` (indices into R^dim),
// with the given angular spacing. Axis directions are always included.
inline std::vector<Point> direction_net(std::size_t dim,
                                        const std::vector<std::size_t>& axes,
                                        double spacing) {
    std::vector<Point> net;
    auto emit = [&](const std::vector<double>& sub) {
        Point u(dim, 0.0);
        for (std::size_t i = 0; i < axes.size(); ++i) u[axes[i]] = sub[i];
        net.push_back(std::move(u));
    };
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        std::vector<double> e(axes.size(), 0.0);
        e[i] = 1.0;
        emit(e);
    }
    if (axes.size() == 2) {
        for (double a = spacing; a < pi; a += spacing)
            emit({std::cos(a), std::sin(a)});
    } else if (axes.size() == 3) {
        const std::size_t nphi =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.5 * pi / spacing)));
        for (std::size_t ip = 1; ip <= nphi; ++ip) {
            const double phi = 0.5 * pi * static_cast<double>(ip) / static_cast<double>(nphi);
            const std::size_t naz = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(2.0 * pi * std::sin(phi) / spacing)));
            for (std::size_t ia = 0; ia < naz; ++ia) {
                const double az = 2.0 * pi * static_cast<double>(ia) / static_cast<double>(naz);
                emit({std::sin(phi) * std::cos(az), std::sin(phi) * std::sin(az),
                      std::cos(phi)});
            }
        }
    }
    return net;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// alpha-kernels

struct AlphaKernel {
    std::vector<std::size_t> indices;  // into the source set, ascending
    PointSet points;
    double alpha = 0.0;    // target (or measured, for capped construction)
    double spacing = 0.0;  // direction-net spacing used
};

namespace detail {

// Extreme points of q over a direction net built on the affinely normalized
// set (bounding box mapped to the unit cube; degenerate axes left out).
inline AlphaKernel net_extremes(const PointSet& q, double spacing) {
    const std::size_t d = q[0].size();
    const AabbStats bb = aabb_stats(q);
    const double degenerate_tol = 1e-12 * coord_scale(q);
    std::vector<std::size_t> axes;
    for (std::size_t i = 0; i < d; ++i)
        if (bb.widths[i] > degenerate_tol) axes.push_back(i);

    AlphaKernel k;
    k.spacing = spacing;
    if (axes.empty()) {  // all points coincide; keep one witness
        k.indices = {0};
        k.points = {q[0]};
        return k;
    }
    require(axes.size() <= 3, "alpha_kernel supports dimension <= 3");

    PointSet norm(q.size(), Point(axes.size()));
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = 0; j < axes.size(); ++j)
            norm[i][j] = (q[i][axes[j]] - bb.box.lo[axes[j]]) / bb.widths[axes[j]];

    std::vector<std::size_t> sub_axes(axes.size());
    for (std::size_t j = 0; j < axes.size(); ++j) sub_axes[j] = j;
    const auto net = direction_net(axes.size(), sub_axes, spacing);

    std::set<std::size_t> chosen;
    for (const Point& u : net) {
        std::size_t lo = 0, hi = 0;
        double lov = dot(norm[0], u), hiv = lov;
        for (std::size_t i = 1; i < norm.size(); ++i) {
            const double t = dot(norm[i], u);
            if (t < lov) { lov = t; lo = i; }
            if (t > hiv) { hiv = t; hi = i; }
        }
        chosen.insert(lo);
        chosen.insert(hi);
    }
    k.indices.assign(chosen.begin(), chosen.end());
    k.points.reserve(k.indices.size());
    for (std::size_t i : k.indices) k.points.push_back(q[i]);
    return k;
}

// Worst relative width error of k against q over seeded random directions.
inline double measured_alpha(const PointSet& q, const PointSet& k, std::size_t ndirs,
                             std::uint64_t seed) {
    const std::size_t d = q[0].size();
    SeededRng rng(seed, 0x416c70ULL);
    double worst = 0.0;
    for (std::size_t i = 0; i < ndirs; ++i) {
        const Direction u = rng.direction(d);
        const double wq = directional_width(q, u).width;
        if (wq <= 0.0) continue;
        const double wk = directional_width(k, u).width;
        worst = std::max(worst, (wq - wk) / wq);
    }
    return worst;
}

}  // namespace detail

// Direction-net alpha-kernel. The initial spacing sqrt(alpha/4) is verified
// post-hoc on seeded random directions with margin and halved until the
// check passes (at most 3 tightenings). Never errors on nonempty input.
inline AlphaKernel alpha_kernel(const PointSet& q, double alpha) {
    point_set_dim(q);
    require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0,1)");
    double spacing = std::sqrt(alpha / 4.0);
    AlphaKernel k;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        k = detail::net_extremes(q, spacing);
        k.alpha = alpha;
        if (k.points.size() == q.size()) break;
        if (detail::measured_alpha(q, k.points, 1024, 0x6b65726eULL) <= 0.85 * alpha)
            break;
        spacing *= 0.5;
    }
    return k;
}

// Largest direction net whose kernel stays within the size cap; used when a
// size budget is given instead of alpha. The alpha field holds the measured
// relative width error. Spacings below the point where the net already has
// ~20x cap directions add nothing (extreme points saturate on the hull), so
// the search bracket stops there.
inline AlphaKernel alpha_kernel_capped(const PointSet& q, std::size_t cap) {
    const std::size_t d = point_set_dim(q);
    require(cap >= 1, "kernel cap must be >= 1");
    if (q.size() <= cap) {
        AlphaKernel k;
        k.indices.resize(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) k.indices[i] = i;
        k.points = q;
        k.alpha = 0.0;
        return k;
    }
    const double pi = 3.14159265358979323846;
    const double budget = 20.0 * static_cast<double>(cap);
    double lo = d <= 2 ? pi / budget : std::sqrt(2.0 * pi / budget);
    double hi = 3.2;
    AlphaKernel fine = detail::net_extremes(q, lo);
    if (fine.points.size() <= cap) {
        fine.alpha = detail::measured_alpha(q, fine.points, 1024, 0x6b65726eULL);
        return fine;
    }
    AlphaKernel best = detail::net_extremes(q, hi);
    for (int it = 0; it < 40; ++it) {
        const double mid = std::sqrt(lo * hi);
        AlphaKernel k = detail::net_extremes(q, mid);
        if (k.points.size() <= cap) {
            if (k.points.size() >= best.points.size()) best = std::move(k);
            hi = mid;
        } else {
            lo = mid;
        }
    }
    best.alpha = detail::measured_alpha(q, best.points, 1024, 0x6b65726eULL);
    return best;
}

// ---------------------------------------------------------------------------
// (eps, alpha)-kernel: m alpha-kernels of sampled point sets

struct EpsAlphaKernelParams {
    double epsilon = 0.2;
    double alpha = 0.1;
    double delta = 0.05;
    std::size_t m_override = 0;
    std::size_t kernel_cap = 0;  // 0: build from alpha; else size-capped
    double sample_constant = 0.5;

    std::size_t trials() const {
        if (m_override) return m_override;
        const double m = std::ceil((sample_constant / (epsilon * epsilon)) *
                                   std::log(1.0 / (epsilon * delta)));
        return std::max<std::size_t>(1, static_cast<std::size_t>(m));
    }
};

struct EpsAlphaKernel {
    EpsAlphaKernelParams params;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    std::string model_fingerprint;
    std::vector<AlphaKernel> kernels;
    std::vector<PointSet> full_sets;  // retained in test mode only

    std::size_t total_points() const {
        std::size_t n = 0;
        for (const auto& k : kernels) n += k.points.size();
        return n;
    }
};

inline std::string model_fingerprint(const UncertainPointSet& model) {
    const std::string text = serialize_model(model);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline EpsAlphaKernel build_eps_alpha_kernel(const UncertainPointSet& model,
                                             const EpsAlphaKernelParams& params,
                                             std::uint64_t seed,
                                             bool test_mode = false,
                                             unsigned threads = 1) {
    model.validate();
    require(params.epsilon > 0.0 && params.epsilon < 1.0, "epsilon must be in (0,1)");
    require(params.alpha > 0.0 && params.alpha < 1.0, "alpha must be in (0,1)");
    require(params.delta > 0.0 && params.delta < 1.0, "delta must be in (0,1)");
    EpsAlphaKernel out;
    out.params = params;
    out.dim = model.dim;
    out.seed = seed;
    out.model_fingerprint = model_fingerprint(model);
    const std::size_t m = params.trials();
    out.kernels.resize(m);
    if (test_mode) out.full_sets.resize(m);
    parallel_for(m, threads, [&](std::size_t j) {
        SeededRng rng(seed, j);
        PointSet q = sample_point_set(model, rng);
        out.kernels[j] = params.kernel_cap ? alpha_kernel_capped(q, params.kernel_cap)
                                           : alpha_kernel(q, params.alpha);
        if (test_mode) out.full_sets[j] = std::move(q);
    });
    return out;
}

// Sorted kernel widths in direction u; reduce with reduce_univariate as needed.
inline UnivariateQuantization width_quantization(const EpsAlphaKernel& k,
                                                 const Direction& u) {
    require(u.dim() == k.dim, "direction dimension mismatch");
    UnivariateQuantization out;
    out.values.reserve(k.kernels.size());
    for (const auto& kj : k.kernels)
        out.values.push_back(directional_width(kj.points, u).width);
    std::sort(out.values.begin(), out.values.end());
    return out;
}

// One k-dimensional point f(K_j) per kernel, for theta(alpha)-approximable f.
inline KVariateQuantization kernel_function_quantization(const EpsAlphaKernel& k,
                                                         const StatisticDescriptor& stat) {
    require(stat.has_theta(), "statistic " + stat.name() + " is not approximable");
    stat.check_dim(k.dim);
    KVariateQuantization out;
    out.k = stat.arity(k.dim);
    out.points.reserve(k.kernels.size());
    for (const auto& kj : k.kernels) out.points.push_back(stat.eval(kj.points));
    std::sort(out.points.begin(), out.points.end());
    return out;
}

// ---------------------------------------------------------------------------
// JSON persistence (kernels only; full sets are a test-mode artifact)

inline std::string serialize_kernels(const EpsAlphaKernel& k) {
    nlohmann::json j;
    j["epsilon"] = k.params.epsilon;
    j["alpha"] = k.params.alpha;
    j["delta"] = k.params.delta;
    j["m"] = k.kernels.size();
    j["kernel_cap"] = k.params.kernel_cap;
    j["dim"] = k.dim;
    j["seed"] = k.seed;
    j["fingerprint"] = k.model_fingerprint;
    j["kernels"] = nlohmann::json::array();
    for (const auto& kj : k.kernels) {
        nlohmann::json jk;
        jk["alpha"] = kj.alpha;
        jk["spacing"] = kj.spacing;
        jk["points"] = kj.points;
        j["kernels"].push_back(std::move(jk));
    }
    return j.dump();
}

inline EpsAlphaKernel parse_kernels(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed kernel document: ") + e.what());
    }
    EpsAlphaKernel k;
    try {
        k.params.epsilon = j.at("epsilon").get<double>();
        k.params.alpha = j.at("alpha").get<double>();
        k.params.delta = j.at("delta").get<double>();
        k.params.kernel_cap = j.at("kernel_cap").get<std::size_t>();
        k.params.m_override = j.at("m").get<std::size_t>();
        k.dim = j.at("dim").get<std::size_t>();
        k.seed = j.at("seed").get<std::uint64_t>();
        k.model_fingerprint = j.at("fingerprint").get<std::string>();
        for (const auto& jk : j.at("kernels")) {
            AlphaKernel ak;
            ak.alpha = jk.at("alpha").get<double>();
            ak.spacing = jk.at("spacing").get<double>();
            ak.points = jk.at("points").get<PointSet>();
            k.kernels.push_back(std::move(ak));
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed kernel document: ") + e.what());
    }
    return k;
}

}  // namespace uex
