#pragma once

#include "uex/quantization.hpp"

namespace uex {

// ---------------------------------------------------------------------------
// Sample families: one finite, uniformly weighted point set per uncertain point

struct SampleFamily {
    std::size_t dim = 0;
    std::vector<PointSet> sets;
    std::string source = "user";  // lattice | discrete | user

    std::size_t total_points() const {
        std::size_t n = 0;
        for (const auto& s : sets) n += s.size();
        return n;
    }

    void validate_shape() const {
        require(dim >= 1, "sample family dimension must be >= 1");
        require(!sets.empty(), "sample family must contain at least one set");
        for (const auto& s : sets) {
            require(!s.empty(), "sample family sets must be nonempty");
            for (const Point& p : s)
                require(p.size() == dim && all_finite(p),
                        "sample family point dimension mismatch");
        }
    }
};

inline std::string serialize_sample_family(const SampleFamily& f) {
    nlohmann::json j;
    j["dim"] = f.dim;
    j["source"] = f.source;
    j["sets"] = f.sets;
    return j.dump();
}

inline SampleFamily parse_sample_family(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed sample family document: ") + e.what());
    }
    SampleFamily f;
    try {
        f.dim = j.at("dim").get<std::size_t>();
        f.source = j.value("source", "user");
        f.sets = j.at("sets").get<std::vector<PointSet>>();
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed sample family document: ") + e.what());
    }
    f.validate_shape();
    return f;
}

inline SampleFamily load_sample_family(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open sample family file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sample_family(ss.str());
}

// ---------------------------------------------------------------------------
// Deterministic-pipeline shape families

// aabb-* and seb2-radius have constant-size bases and support the
// valid-basis enumeration; diam and the hull measures have basis size n and
// are reachable only through the brute-force oracle.
enum class DetFamily {
    aabb_perimeter,
    aabb_volume,
    aabb_widths,
    seb2_radius,
    diam,
    chull_area,
    chull_perimeter,
};

inline DetFamily parse_det_family(const std::string& s) {
    if (s == "aabb-perimeter") return DetFamily::aabb_perimeter;
    if (s == "aabb-volume") return DetFamily::aabb_volume;
    if (s == "aabb-widths") return DetFamily::aabb_widths;
    if (s == "seb2-radius") return DetFamily::seb2_radius;
    if (s == "diam") return DetFamily::diam;
    if (s == "chull-area") return DetFamily::chull_area;
    if (s == "chull-perimeter") return DetFamily::chull_perimeter;
    throw error("unknown deterministic family \"" + s + "\"");
}

inline const char* det_family_name(DetFamily f) {
    switch (f) {
        case DetFamily::aabb_perimeter: return "aabb-perimeter";
        case DetFamily::aabb_volume: return "aabb-volume";
        case DetFamily::aabb_widths: return "aabb-widths";
        case DetFamily::seb2_radius: return "seb2-radius";
        case DetFamily::diam: return "diam";
        case DetFamily::chull_area: return "chull-area";
        case DetFamily::chull_perimeter: return "chull-perimeter";
    }
    return "?";
}

inline bool is_aabb_family(DetFamily f) {
    return f == DetFamily::aabb_perimeter || f == DetFamily::aabb_volume ||
           f == DetFamily::aabb_widths;
}

inline bool has_constant_basis(DetFamily f) {
    return is_aabb_family(f) || f == DetFamily::seb2_radius;
}

inline std::size_t basis_size_bound(DetFamily f, std::size_t dim) {
    require(has_constant_basis(f),
            std::string("family ") + det_family_name(f) +
                " has basis size n and is exposed only through brute_force_cdf");
    return is_aabb_family(f) ? 2 * dim : dim + 1;
}

inline std::size_t det_family_arity(DetFamily f, std::size_t dim) {
    return f == DetFamily::aabb_widths ? dim : 1;
}

namespace detail {

// The statistic value of a shape, computed from box widths or a ball so that
// the valid-basis path and the brute-force oracle share one code path bit for bit
inline std::vector<double> aabb_family_value(DetFamily f, const std::vector<double>& widths) {
    if (f == DetFamily::aabb_widths) return widths;
    if (f == DetFamily::aabb_volume) {
        double v = 1.0;
        for (double w : widths) v *= w;
        return {v};
    }
    double b = 0.0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        double face = 1.0;
        for (std::size_t j = 0; j < widths.size(); ++j)
            if (j != i) face *= widths[j];
        b += 2.0 * face;
    }
    return {b};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// General-position validation

struct GeneralPositionReport {
    bool ok = true;
    std::string message;
};

inline GeneralPositionReport validate_general_position(const SampleFamily& f,
                                                       DetFamily family) {
    f.validate_shape();
    GeneralPositionReport rep;
    struct Ref {
        double v;
        std::size_t set, pt;
    };
    double scale = 1.0;
    for (const auto& s : f.sets)
        for (const Point& p : s)
            for (double c : p) scale = std::max(scale, std::abs(c));

    if (is_aabb_family(family)) {
        // Every coordinate pairwise distinct across the union, per axis.
        const double tol = 1e-9 * scale;
        for (std::size_t axis = 0; axis < f.dim; ++axis) {
            std::vector<Ref> refs;
            for (std::size_t i = 0; i < f.sets.size(); ++i)
                for (std::size_t j = 0; j < f.sets[i].size(); ++j)
                    refs.push_back({f.sets[i][j][axis], i, j});
            std::sort(refs.begin(), refs.end(),
                      [](const Ref& a, const Ref& b) { return a.v < b.v; });
            for (std::size_t i = 0; i + 1 < refs.size(); ++i) {
                if (std::abs(refs[i + 1].v - refs[i].v) <= tol) {
                    rep.ok = false;
                    rep.message = "coordinate tie on axis " + std::to_string(axis) +
                                  " between set " + std::to_string(refs[i].set) +
                                  " point " + std::to_string(refs[i].pt) + " and set " +
                                  std::to_string(refs[i + 1].set) + " point " +
                                  std::to_string(refs[i + 1].pt);
                    return rep;
                }
            }
        }
        return rep;
    }

    if (family != DetFamily::seb2_radius) return rep;  // no certificate required

    // seb2: no concyclic quadruple with points from four distinct sets.
    require(f.dim == 2, "seb2 general-position check requires dimension 2");
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < f.sets.size(); ++i)
        for (std::size_t j = 0; j < f.sets[i].size(); ++j) all.emplace_back(i, j);

    auto concyclic = [&](const Point& a, const Point& b, const Point& c,
                         const Point& d) {
        // InCircle determinant, normalized by the coordinate scale.
        const double ax = (a[0] - d[0]) / scale, ay = (a[1] - d[1]) / scale;
        const double bx = (b[0] - d[0]) / scale, by = (b[1] - d[1]) / scale;
        const double cx = (c[0] - d[0]) / scale, cy = (c[1] - d[1]) / scale;
        const double det = (ax * ax + ay * ay) * (bx * cy - by * cx) -
                           (bx * bx + by * by) * (ax * cy - ay * cx) +
                           (cx * cx + cy * cy) * (ax * by - ay * bx);
        return std::abs(det) <= 1e-9;
    };
    auto check = [&](std::size_t p0, std::size_t p1, std::size_t p2, std::size_t p3) {
        const auto& [s0, i0] = all[p0];
        const auto& [s1, i1] = all[p1];
        const auto& [s2, i2] = all[p2];
        const auto& [s3, i3] = all[p3];
        if (s0 == s1 || s0 == s2 || s0 == s3 || s1 == s2 || s1 == s3 || s2 == s3)
            return true;
        if (!concyclic(f.sets[s0][i0], f.sets[s1][i1], f.sets[s2][i2], f.sets[s3][i3]))
            return true;
        rep.ok = false;
        rep.message = "concyclic quadruple: sets " + std::to_string(s0) + "," +
                      std::to_string(s1) + "," + std::to_string(s2) + "," +
                      std::to_string(s3);
        return false;
    };
    if (f.sets.size() < 4) return rep;
    if (all.size() <= 200) {
        for (std::size_t a = 0; a < all.size(); ++a)
            for (std::size_t b = a + 1; b < all.size(); ++b)
                for (std::size_t c = b + 1; c < all.size(); ++c)
                    for (std::size_t d = c + 1; d < all.size(); ++d)
                        if (!check(a, b, c, d)) return rep;
    } else {
        SeededRng rng(0x9c, all.size());
        for (std::size_t t = 0; t < 1'000'000; ++t) {
            const std::size_t a = rng.index(all.size()), b = rng.index(all.size());
            const std::size_t c = rng.index(all.size()), d = rng.index(all.size());
            if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
            if (!check(a, b, c, d)) return rep;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Lattice eps-samples of uniform convex polygons (d = 2)

inline double lattice_target_constant() { return 2.0; }

inline std::size_t lattice_target_size(double eps, double vc_tag) {
    const double t = lattice_target_constant() * (vc_tag / (eps * eps)) *
                     std::log(std::max(2.72, vc_tag / eps));
    return std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(t)));
}

// Square-lattice points inside a convex polygon, origin randomly shifted,
// spacing rescaled until the count lands in [target, 2*target].
inline PointSet lattice_eps_sample(const PointSet& polygon, double eps, double vc_tag,
                                   SeededRng& rng) {
    require(polygon.size() >= 3, "lattice_eps_sample requires a polygon");
    for (const Point& v : polygon)
        require(v.size() == 2, "lattice_eps_sample requires dimension 2");
    require(eps > 0.0 && eps < 1.0, "epsilon must be in (0,1)");
    const double area = polygon_area(polygon);
    require(area > 0.0, "polygon area must be positive (counterclockwise, non-degenerate)");

    const std::size_t target = lattice_target_size(eps, vc_tag);
    double lo_x = polygon[0][0], hi_x = lo_x, lo_y = polygon[0][1], hi_y = lo_y;
    for (const Point& v : polygon) {
        lo_x = std::min(lo_x, v[0]);
        hi_x = std::max(hi_x, v[0]);
        lo_y = std::min(lo_y, v[1]);
        hi_y = std::max(hi_y, v[1]);
    }
    const double sx = rng.uniform01(), sy = rng.uniform01();
    double g = std::sqrt(area / static_cast<double>(target));
    PointSet m;
    for (int iter = 0; iter < 80; ++iter) {
        m.clear();
        const double ox = lo_x + sx * g, oy = lo_y + sy * g;
        for (double y = oy; y <= hi_y; y += g)
            for (double x = ox; x <= hi_x; x += g)
                if (point_in_convex_polygon({x, y}, polygon)) m.push_back({x, y});
        if (m.size() < target)
            g /= std::sqrt(2.0);
        else if (m.size() > 2 * target)
            g *= std::sqrt(2.0);
        else
            return m;
    }
    require(!m.empty(), "lattice_eps_sample failed to populate the region");
    return m;
}

// ---------------------------------------------------------------------------
// Per-point A_{f,n}-samples with general-position perturbation

namespace detail {

inline double perturb_unit(std::uint64_t set, std::uint64_t pt, std::uint64_t axis,
                           std::uint64_t attempt) {
    std::uint64_t s = 0x9e3779b97f4a7c15ULL ^ (set << 40) ^ (pt << 20) ^ (axis << 4) ^
                      attempt;
    const std::uint64_t r = splitmix64(s);
    return 2.0 * (static_cast<double>(r >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace detail

inline SampleFamily build_afn_samples(const UncertainPointSet& model, DetFamily family,
                                      double eps, std::uint64_t seed) {
    model.validate();
    require(is_aabb_family(family),
            "build_afn_samples supports axis-aligned box families only");
    require(eps > 0.0 && eps < 1.0, "epsilon must be in (0,1)");
    SampleFamily f;
    f.dim = model.dim;
    bool any_lattice = false;
    const double per_point_eps = eps / static_cast<double>(model.size());
    const double vc_tag = 2.0 * static_cast<double>(model.dim);
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto& d = model.points[i];
        if (d.kind == DistKind::discrete) {
            PointSet q;
            for (const auto& s : d.support) q.push_back(s.p);
            f.sets.push_back(std::move(q));
        } else if (d.kind == DistKind::uniform_polygon) {
            SeededRng rng(seed, 0xaf0000ULL + i);
            f.sets.push_back(lattice_eps_sample(d.vertices, per_point_eps, vc_tag, rng));
            any_lattice = true;
        } else if (d.kind == DistKind::gaussian) {
            throw error("point " + std::to_string(i) +
                        ": gaussian component is unbounded; truncate first");
        } else {
            throw error("point " + std::to_string(i) +
                        ": uniform-disk component is not polygonal; "
                        "approximate it with a convex polygon first");
        }
    }
    f.source = any_lattice ? "lattice" : "discrete";

    double scale = 1.0;
    for (const auto& s : f.sets)
        for (const Point& p : s)
            for (double c : p) scale = std::max(scale, std::abs(c));
    const double magnitude = 1e-7 * scale;
    // Coordinates tied exactly (lattice rows and columns, shared supports)
    // receive offsets on evenly spaced slots spread over the full +-magnitude
    // range, so each tied group separates by ~2*magnitude/group size.
    struct Ref {
        double v;
        std::size_t set, pt;
    };
    for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
        SampleFamily pert = f;
        for (std::size_t axis = 0; axis < f.dim; ++axis) {
            std::vector<Ref> refs;
            for (std::size_t i = 0; i < f.sets.size(); ++i)
                for (std::size_t j = 0; j < f.sets[i].size(); ++j)
                    refs.push_back({f.sets[i][j][axis], i, j});
            std::sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
                if (a.v != b.v) return a.v < b.v;
                if (a.set != b.set) return a.set < b.set;
                return a.pt < b.pt;
            });
            for (std::size_t run = 0; run < refs.size();) {
                std::size_t end = run;
                while (end < refs.size() && refs[end].v == refs[run].v) ++end;
                const std::size_t gsz = end - run;
                if (gsz == 1) {
                    const Ref& r = refs[run];
                    pert.sets[r.set][r.pt][axis] +=
                        magnitude * detail::perturb_unit(r.set, r.pt, axis, attempt);
                } else {
                    std::vector<std::size_t> slot(gsz);
                    for (std::size_t s = 0; s < gsz; ++s) slot[s] = s;
                    SeededRng shuffle(0xafbe00ULL + attempt, (axis << 32) ^ run);
                    for (std::size_t s = gsz; s > 1; --s)
                        std::swap(slot[s - 1], slot[shuffle.index(s)]);
                    for (std::size_t s = 0; s < gsz; ++s) {
                        const Ref& r = refs[run + s];
                        const double u =
                            2.0 * (static_cast<double>(slot[s]) + 0.5) /
                                static_cast<double>(gsz) -
                            1.0;
                        pert.sets[r.set][r.pt][axis] += magnitude * u;
                    }
                }
                run = end;
            }
        }
        if (validate_general_position(pert, family).ok) return pert;
    }
    throw error("build_afn_samples: perturbation failed to reach general position");
}

// ---------------------------------------------------------------------------
// Weighted CDFs

// Sorted list of (r, eta) tuples in flat row-major storage: row i holds the
// k statistic values, masses[i] its probability mass.
struct WeightedCdf {
    std::size_t k = 1;
    std::vector<double> values;  // size() * k, rows sorted lexicographically
    std::vector<double> masses;  // eta > 0 per row, sums to 1

    std::size_t size() const { return masses.size(); }
    const double* row(std::size_t i) const { return values.data() + i * k; }
    double value1(std::size_t i) const { return values[i * k]; }

    double mass() const {
        double s = 0.0;
        for (double m : masses) s += m;
        return s;
    }

    // F(t) for k = 1.
    double cdf(double t) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size() && value1(i) <= t; ++i) s += masses[i];
        return s;
    }

    // Dominance CDF for general k.
    double cdf(const std::vector<double>& v) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            const double* r = row(i);
            bool dom = true;
            for (std::size_t j = 0; j < k && dom; ++j) dom = r[j] <= v[j];
            if (dom) s += masses[i];
        }
        return s;
    }
};

namespace detail {

// Sort rows lexicographically, merge equal rows, drop zero masses, and
// rescale by 1/denom (pass denom = 1 for pre-normalized masses).
inline WeightedCdf sort_and_merge(std::size_t k, std::vector<double>&& rows,
                                  std::vector<double>&& masses, double denom) {
    const std::size_t n = masses.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    auto less = [&](std::size_t a, std::size_t b) {
        const double* ra = rows.data() + a * k;
        const double* rb = rows.data() + b * k;
        for (std::size_t j = 0; j < k; ++j) {
            if (ra[j] < rb[j]) return true;
            if (ra[j] > rb[j]) return false;
        }
        return false;
    };
    auto equal = [&](std::size_t a, std::size_t b) {
        const double* ra = rows.data() + a * k;
        const double* rb = rows.data() + b * k;
        for (std::size_t j = 0; j < k; ++j)
            if (ra[j] != rb[j]) return false;
        return true;
    };
    std::sort(perm.begin(), perm.end(), less);
    WeightedCdf w;
    w.k = k;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        double m = 0.0;
        while (j < n && equal(perm[i], perm[j])) m += masses[perm[j++]];
        if (m > 0.0) {
            for (std::size_t c = 0; c < k; ++c)
                w.values.push_back(rows[perm[i] * k + c]);
            w.masses.push_back(m / denom);
        }
        i = j;
    }
    return w;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Brute-force oracle: every combination, one point per set

inline WeightedCdf brute_force_cdf(const SampleFamily& f, DetFamily family) {
    f.validate_shape();
    if (family == DetFamily::seb2_radius)
        require(f.dim == 2, "seb2-radius deterministic family requires dimension 2");
    if (family == DetFamily::chull_area || family == DetFamily::chull_perimeter)
        require(f.dim == 2, "hull deterministic families require dimension 2");
    double combos = 1.0;
    for (const auto& s : f.sets) combos *= static_cast<double>(s.size());
    require(combos <= 1e7, "brute_force_cdf: product of set sizes exceeds 1e7");

    const std::size_t n = f.sets.size();
    std::uint64_t denom = 1;
    for (const auto& s : f.sets) denom *= s.size();
    const std::size_t k = det_family_arity(family, f.dim);

    std::vector<double> rows, masses;
    rows.reserve(static_cast<std::size_t>(combos) * k);
    masses.reserve(static_cast<std::size_t>(combos));
    std::vector<std::size_t> idx(n, 0);
    PointSet combo(n);
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) combo[i] = f.sets[i][idx[i]];
        switch (family) {
            case DetFamily::seb2_radius:
                rows.push_back(seb2(combo).ball.radius);
                break;
            case DetFamily::diam:
                rows.push_back(diameter(combo));
                break;
            case DetFamily::chull_area:
                rows.push_back(chull_stats_2d(combo).area);
                break;
            case DetFamily::chull_perimeter:
                rows.push_back(chull_stats_2d(combo).perimeter);
                break;
            default: {
                const auto value =
                    detail::aabb_family_value(family, aabb_stats(combo).widths);
                rows.insert(rows.end(), value.begin(), value.end());
                break;
            }
        }
        masses.push_back(1.0);
        std::size_t i = 0;
        while (i < n && ++idx[i] == f.sets[i].size()) idx[i++] = 0;
        if (i == n) break;
    }
    return detail::sort_and_merge(k, std::move(rows), std::move(masses),
                                  static_cast<double>(denom));
}

// ---------------------------------------------------------------------------
// Valid-basis enumeration

namespace detail {

struct BasisPoint {
    std::size_t set, pt;
};

// Enumerate all subsets of 1..max_size points drawn from distinct sets.
template <typename F>
void for_each_cross_set_subset(const SampleFamily& fam, std::size_t max_size, F&& f) {
    const std::size_t n = fam.sets.size();
    std::vector<BasisPoint> current;
    std::function<void(std::size_t)> rec = [&](std::size_t next_set) {
        if (!current.empty()) f(current);
        if (current.size() == max_size) return;
        for (std::size_t s = next_set; s < n; ++s)
            for (std::size_t p = 0; p < fam.sets[s].size(); ++p) {
                current.push_back({s, p});
                rec(s + 1);
                current.pop_back();
            }
    };
    rec(0);
}

}  // namespace detail

inline WeightedCdf valid_basis_quantization(const SampleFamily& f, DetFamily family) {
    f.validate_shape();
    if (family == DetFamily::seb2_radius)
        require(f.dim == 2, "seb2-radius deterministic family requires dimension 2");
    const std::size_t n = f.sets.size();
    const std::size_t sigma = std::min(basis_size_bound(family, f.dim), n);
    const auto gp = validate_general_position(f, family);
    require(gp.ok, "general-position violation: " + gp.message);
    const std::size_t k = det_family_arity(family, f.dim);
    std::uint64_t denom = 1;
    bool exact = true;
    for (const auto& s : f.sets) {
        if (denom > (1ULL << 60) / s.size()) { exact = false; break; }
        denom *= s.size();
    }

    std::vector<double> rows, raw_masses;
    std::uint64_t numerator_sum = 0;

    std::vector<char> contributes(n, 0);
    auto tally = [&](const std::vector<detail::BasisPoint>& basis,
                     const std::vector<double>& value, auto&& inside_count) {
        for (std::size_t i = 0; i < n; ++i) contributes[i] = 0;
        for (const auto& b : basis) contributes[b.set] = 1;
        // Good sets represented by this basis: contributing sets are pinned
        // to the basis point, every other set picks a strict insider.
        std::uint64_t numer = 1;
        double mass = 1.0;
        for (std::size_t i = 0; i < n && numer > 0; ++i) {
            if (contributes[i]) {
                mass /= static_cast<double>(f.sets[i].size());
                continue;
            }
            const std::uint64_t cnt = inside_count(i);
            numer *= cnt;
            if (!exact)
                mass *= static_cast<double>(cnt) / static_cast<double>(f.sets[i].size());
        }
        if (numer == 0) return;
        if (exact) {
            numerator_sum += numer;
            mass = static_cast<double>(numer);  // rescaled by 1/denom in the merge
        }
        rows.insert(rows.end(), value.begin(), value.end());
        raw_masses.push_back(mass);
    };

    if (is_aabb_family(family)) {
        detail::for_each_cross_set_subset(f, sigma, [&](const std::vector<detail::BasisPoint>& b) {
            if (n > 1 && b.size() < 2) return;  // singleton basis exists only for n = 1
            // Box of the candidate basis.
            Point lo = f.sets[b[0].set][b[0].pt], hi = lo;
            for (std::size_t i = 1; i < b.size(); ++i) {
                const Point& p = f.sets[b[i].set][b[i].pt];
                for (std::size_t a = 0; a < f.dim; ++a) {
                    lo[a] = std::min(lo[a], p[a]);
                    hi[a] = std::max(hi[a], p[a]);
                }
            }
            // Valid iff every basis point attains at least one extreme.
            for (const auto& bp : b) {
                const Point& p = f.sets[bp.set][bp.pt];
                bool extreme = false;
                for (std::size_t a = 0; a < f.dim && !extreme; ++a)
                    extreme = (p[a] == lo[a]) || (p[a] == hi[a]);
                if (!extreme) return;
            }
            std::vector<double> widths(f.dim);
            for (std::size_t a = 0; a < f.dim; ++a) widths[a] = hi[a] - lo[a];
            const auto value = detail::aabb_family_value(family, widths);
            tally(b, value, [&](std::size_t i) {
                std::uint64_t cnt = 0;
                for (const Point& p : f.sets[i]) {
                    bool inside = true;
                    for (std::size_t a = 0; a < f.dim && inside; ++a)
                        inside = (p[a] > lo[a]) && (p[a] < hi[a]);  // strict
                    cnt += inside;
                }
                return cnt;
            });
        });
    } else {
        detail::for_each_cross_set_subset(f, sigma, [&](const std::vector<detail::BasisPoint>& b) {
            if (n > 1 && b.size() < 2) return;
            std::vector<const Point*> pts;
            pts.reserve(b.size());
            for (const auto& bp : b) pts.push_back(&f.sets[bp.set][bp.pt]);
            if (b.size() == 3) {
                // Minimal only for acute triangles; otherwise the long side's
                // diameter ball is the smaller enclosing ball.
                const Point& p0 = *pts[0];
                const Point& p1 = *pts[1];
                const Point& p2 = *pts[2];
                if (dot(sub(p1, p0), sub(p2, p0)) <= 0.0) return;
                if (dot(sub(p0, p1), sub(p2, p1)) <= 0.0) return;
                if (dot(sub(p0, p2), sub(p1, p2)) <= 0.0) return;
            }
            const auto ball = detail::ball_from_boundary(pts);
            if (!ball) return;
            const double r2 = ball->radius * ball->radius;
            tally(b, {ball->radius}, [&](std::size_t i) {
                std::uint64_t cnt = 0;
                for (const Point& p : f.sets[i])
                    cnt += dist2(p, ball->center) < r2;  // strict
                return cnt;
            });
        });
    }

    WeightedCdf w = detail::sort_and_merge(
        k, std::move(rows), std::move(raw_masses),
        exact ? static_cast<double>(denom) : 1.0);
    if (exact) {
        if (numerator_sum != denom) {
            const double deficit = (static_cast<double>(denom) -
                                    static_cast<double>(numerator_sum)) /
                                   static_cast<double>(denom);
            throw error("valid_basis_quantization mass-sum failure; deficit " +
                        std::to_string(deficit));
        }
    } else {
        const double total = w.mass();
        require(std::abs(total - 1.0) <= 1e-9,
                "valid_basis_quantization mass-sum failure; deficit " +
                    std::to_string(1.0 - total));
    }
    return w;
}

// ---------------------------------------------------------------------------
// Weighted reduction to a univariate quantization

inline UnivariateQuantization cdf_to_quantization(const WeightedCdf& w, double epsilon) {
    require(w.k == 1, "cdf_to_quantization requires a univariate WeightedCdf");
    require(w.size() > 0, "empty weighted cdf");
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
    const std::size_t k = static_cast<std::size_t>(std::ceil(2.0 / epsilon));
    UnivariateQuantization out;
    out.values.reserve(k);
    std::size_t pos = 0;
    double cum = w.masses[0];
    for (std::size_t i = 1; i <= k; ++i) {
        const double target =
            (static_cast<double>(i) - 0.5) / static_cast<double>(k);
        while (cum < target && pos + 1 < w.size()) cum += w.masses[++pos];
        out.values.push_back(w.value1(pos));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV output: r (k columns) then eta, with a comment header

inline void write_cdf_csv(std::ostream& os, const WeightedCdf& w, DetFamily family,
                          const SampleFamily& f) {
    os << "# family=" << det_family_name(family) << " n=" << f.sets.size()
       << " sizes=";
    for (std::size_t i = 0; i < f.sets.size(); ++i)
        os << (i ? "|" : "") << f.sets[i].size();
    os << " source=" << f.source << "\n";
    os << std::setprecision(17);
    if (w.k == 1)
        os << "r,eta\n";
    else {
        for (std::size_t i = 0; i < w.k; ++i) os << "r" << i + 1 << ",";
        os << "eta\n";
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < w.k; ++j) os << w.row(i)[j] << ",";
        os << w.masses[i] << "\n";
    }
}

}  // namespace uex
