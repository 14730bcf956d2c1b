#pragma once

#include <iomanip>
#include <ostream>

#include "uex/geometry.hpp"
#include "uex/model.hpp"
#include "uex/parallel.hpp"

namespace uex {

// ---------------------------------------------------------------------------
// Statistics on fixed point sets

enum class Stat {
    diam,
    dwid,
    seb2_radius,
    aabb_perimeter,
    aabb_volume,
    aabb_widths,
    chull_area,
    chull_perimeter,
};

struct StatisticDescriptor {
    Stat stat = Stat::diam;
    std::optional<Direction> direction;  // dwid only

    static StatisticDescriptor parse(const std::string& name,
                                     std::optional<Direction> dir = std::nullopt) {
        StatisticDescriptor s;
        if (name == "diam") s.stat = Stat::diam;
        else if (name == "dwid") s.stat = Stat::dwid;
        else if (name == "seb2-radius") s.stat = Stat::seb2_radius;
        else if (name == "aabb-perimeter") s.stat = Stat::aabb_perimeter;
        else if (name == "aabb-volume") s.stat = Stat::aabb_volume;
        else if (name == "aabb-widths") s.stat = Stat::aabb_widths;
        else if (name == "chull-area") s.stat = Stat::chull_area;
        else if (name == "chull-perimeter") s.stat = Stat::chull_perimeter;
        else throw error("unknown statistic \"" + name + "\"");
        if (s.stat == Stat::dwid) {
            require(dir.has_value(), "dwid requires a direction");
            s.direction = std::move(dir);
        }
        return s;
    }

    std::string name() const {
        switch (stat) {
            case Stat::diam: return "diam";
            case Stat::dwid: return "dwid";
            case Stat::seb2_radius: return "seb2-radius";
            case Stat::aabb_perimeter: return "aabb-perimeter";
            case Stat::aabb_volume: return "aabb-volume";
            case Stat::aabb_widths: return "aabb-widths";
            case Stat::chull_area: return "chull-area";
            case Stat::chull_perimeter: return "chull-perimeter";
        }
        return "?";
    }

    std::size_t arity(std::size_t dim) const {
        return stat == Stat::aabb_widths ? dim : 1;
    }

    void check_dim(std::size_t dim) const {
        if (stat == Stat::seb2_radius)
            require(dim == 2 || dim == 3, "seb2-radius requires dimension 2 or 3");
        if (stat == Stat::chull_area || stat == Stat::chull_perimeter)
            require(dim == 2, name() + " requires dimension 2");
        if (stat == Stat::dwid)
            require(direction && direction->dim() == dim,
                    "dwid direction dimension mismatch");
    }

    std::vector<double> eval(const PointSet& q) const {
        switch (stat) {
            case Stat::diam: return {diameter(q)};
            case Stat::dwid: return {directional_width(q, *direction).width};
            case Stat::seb2_radius: return {seb2(q).ball.radius};
            case Stat::aabb_perimeter: return {aabb_stats(q).boundary_measure};
            case Stat::aabb_volume: return {aabb_stats(q).volume};
            case Stat::aabb_widths: return aabb_stats(q).widths;
            case Stat::chull_area: return {chull_stats_2d(q).area};
            case Stat::chull_perimeter: return {chull_stats_2d(q).perimeter};
        }
        throw error("unreachable statistic");
    }

    double eval_scalar(const PointSet& q) const {
        const auto v = eval(q);
        require(v.size() == 1, name() + " is not scalar-valued");
        return v[0];
    }

    // Relative theta(alpha)-approximability under alpha-kernels.
    bool has_theta() const {
        return stat == Stat::diam || stat == Stat::dwid ||
               stat == Stat::seb2_radius || stat == Stat::aabb_widths;
    }

    double theta(double alpha) const {
        switch (stat) {
            case Stat::diam:
            case Stat::dwid:
            case Stat::aabb_widths: return alpha;
            case Stat::seb2_radius: return 2.0 * alpha;
            default: break;
        }
        throw error("statistic " + name() + " is not approximable");
    }
};

// ---------------------------------------------------------------------------
// Parameters

struct QuantizationParams {
    double epsilon = 0.1;
    double delta = 0.05;
    std::size_t m_override = 0;     // 0: derive from the formula
    double sample_constant = 0.5;   // C in m = ceil((C/eps^2) ln(1/(eps delta)))

    void validate() const {
        require(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
        require(delta > 0.0 && delta < 1.0, "delta must be in (0,1)");
        require(sample_constant > 0.0, "sample constant must be positive");
    }

    std::size_t trials_univariate() const {
        if (m_override) return m_override;
        const double m = std::ceil((sample_constant / (epsilon * epsilon)) *
                                   std::log(1.0 / (epsilon * delta)));
        return std::max<std::size_t>(1, static_cast<std::size_t>(m));
    }

    std::size_t trials_kvariate(std::size_t k) const {
        if (m_override) return m_override;
        const double kk = static_cast<double>(k);
        const double m = std::ceil((sample_constant * kk / (epsilon * epsilon)) *
                                   std::log(kk / (epsilon * delta)));
        return std::max<std::size_t>(1, static_cast<std::size_t>(m));
    }
};

// ---------------------------------------------------------------------------
// Univariate quantizations

struct UnivariateQuantization {
    std::vector<double> values;  // sorted nondecreasing
};

inline double eval_univariate(const UnivariateQuantization& r, double t) {
    require(!r.values.empty(), "empty quantization");
    const auto it = std::upper_bound(r.values.begin(), r.values.end(), t);
    return static_cast<double>(it - r.values.begin()) /
           static_cast<double>(r.values.size());
}

// Keeps ceil(2/eps) values at the rank midpoints of the sorted input; the
// output empirical CDF stays within 1/k of the input's.
inline UnivariateQuantization reduce_univariate(const std::vector<double>& sorted_values,
                                                double epsilon) {
    require(!sorted_values.empty(), "empty value list");
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
    const std::size_t k = static_cast<std::size_t>(std::ceil(2.0 / epsilon));
    UnivariateQuantization out;
    if (sorted_values.size() <= k) {
        out.values = sorted_values;
        return out;
    }
    const double m = static_cast<double>(sorted_values.size());
    out.values.reserve(k);
    for (std::size_t i = 1; i <= k; ++i) {
        const double rank = (static_cast<double>(i) - 0.5) * m / static_cast<double>(k);
        const std::size_t idx = static_cast<std::size_t>(std::ceil(rank)) - 1;
        out.values.push_back(sorted_values[std::min(idx, sorted_values.size() - 1)]);
    }
    return out;
}

inline std::vector<double> monte_carlo_values(const UncertainPointSet& model,
                                              const StatisticDescriptor& stat,
                                              std::size_t m, std::uint64_t seed,
                                              unsigned threads = 1) {
    model.validate();
    stat.check_dim(model.dim);
    std::vector<double> v(m);
    parallel_for(m, threads, [&](std::size_t i) {
        SeededRng rng(seed, i);
        v[i] = stat.eval_scalar(sample_point_set(model, rng));
    });
    std::sort(v.begin(), v.end());
    return v;
}

inline UnivariateQuantization build_univariate(const UncertainPointSet& model,
                                               const StatisticDescriptor& stat,
                                               const QuantizationParams& params,
                                               std::uint64_t seed,
                                               unsigned threads = 1) {
    params.validate();
    require(stat.arity(model.dim) == 1, "statistic is not univariate");
    const std::size_t m = params.trials_univariate();
    return reduce_univariate(monte_carlo_values(model, stat, m, seed, threads),
                             params.epsilon);
}

// ---------------------------------------------------------------------------
// k-variate quantizations (dominance counting)

struct KVariateQuantization {
    std::size_t k = 1;
    std::vector<std::vector<double>> points;
};

inline double eval_kvariate(const KVariateQuantization& r, const std::vector<double>& v) {
    require(v.size() == r.k, "query dimension mismatch");
    require(!r.points.empty(), "empty quantization");
    std::size_t count = 0;
    for (const auto& p : r.points) {
        bool dom = true;
        for (std::size_t i = 0; i < r.k; ++i)
            if (p[i] > v[i]) { dom = false; break; }
        count += dom;
    }
    return static_cast<double>(count) / static_cast<double>(r.points.size());
}

inline KVariateQuantization build_kvariate(const UncertainPointSet& model,
                                           const StatisticDescriptor& stat,
                                           const QuantizationParams& params,
                                           std::uint64_t seed,
                                           unsigned threads = 1) {
    params.validate();
    model.validate();
    stat.check_dim(model.dim);
    const std::size_t k = stat.arity(model.dim);
    require(k >= 1, "statistic arity must be >= 1");
    const std::size_t m = params.trials_kvariate(k);
    KVariateQuantization out;
    out.k = k;
    out.points.resize(m);
    parallel_for(m, threads, [&](std::size_t i) {
        SeededRng rng(seed, i);
        out.points[i] = stat.eval(sample_point_set(model, rng));
    });
    std::sort(out.points.begin(), out.points.end());
    return out;
}

// Random subsample with a verification pass: the reduced set must stay
// within eps/2 of the input on a dominance-query grid (20 cells per axis,
// k <= 3); up to 3 retries with fresh subsamples.
inline KVariateQuantization reduce_kvariate(const KVariateQuantization& full,
                                            double epsilon, SeededRng& rng,
                                            double sample_constant = 0.5) {
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
    const double kk = static_cast<double>(full.k);
    const std::size_t target = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(
               (sample_constant * kk / (epsilon * epsilon)) * std::log(4.0 / epsilon))));
    if (full.points.size() <= target) return full;
    require(full.k <= 3, "reduce_kvariate verification supports k <= 3");

    std::vector<double> lo(full.k), hi(full.k);
    for (std::size_t i = 0; i < full.k; ++i) {
        lo[i] = hi[i] = full.points[0][i];
        for (const auto& p : full.points) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    const std::size_t cells = 20;
    std::vector<std::vector<double>> grid;
    std::vector<std::size_t> idx(full.k, 0);
    for (;;) {
        std::vector<double> q(full.k);
        for (std::size_t i = 0; i < full.k; ++i)
            q[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) /
                               static_cast<double>(cells - 1);
        grid.push_back(q);
        std::size_t i = 0;
        while (i < full.k && ++idx[i] == cells) idx[i++] = 0;
        if (i == full.k) break;
    }

    double worst = 0.0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        KVariateQuantization red;
        red.k = full.k;
        red.points.reserve(target);
        for (std::size_t i = 0; i < target; ++i)
            red.points.push_back(full.points[rng.index(full.points.size())]);
        std::sort(red.points.begin(), red.points.end());
        double dev = 0.0;
        for (const auto& q : grid)
            dev = std::max(dev, std::abs(eval_kvariate(red, q) - eval_kvariate(full, q)));
        if (dev <= epsilon / 2.0) return red;
        worst = std::max(worst, dev);
    }
    throw error("reduce_kvariate verification failed after 3 attempts; observed deviation " +
                std::to_string(worst));
}

// ---------------------------------------------------------------------------
// CSV output: comment header, one value (or k comma-separated values) per line

struct CsvHeader {
    std::string statistic;
    double epsilon = 0.0;
    double delta = 0.0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
};

inline void write_csv_header(std::ostream& os, const CsvHeader& h) {
    os << "# statistic=" << h.statistic << " epsilon=" << h.epsilon
       << " delta=" << h.delta << " m=" << h.m << " seed=" << h.seed << "\n";
}

inline void write_csv(std::ostream& os, const UnivariateQuantization& r,
                      const CsvHeader& h) {
    write_csv_header(os, h);
    os << std::setprecision(17);
    for (double v : r.values) os << v << "\n";
}

inline void write_csv(std::ostream& os, const KVariateQuantization& r,
                      const CsvHeader& h) {
    write_csv_header(os, h);
    os << std::setprecision(17);
    for (const auto& p : r.points) {
        for (std::size_t i = 0; i < p.size(); ++i)
            os << (i ? "," : "") << p[i];
        os << "\n";
    }
}

}  // namespace uex
