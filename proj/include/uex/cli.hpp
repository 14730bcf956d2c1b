#pragma once

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "uex/deterministic.hpp"
#include "uex/kernels.hpp"
#include "uex/sip.hpp"

namespace uex {

// ---------------------------------------------------------------------------
// Helpers shared by CLI commands

inline Direction parse_direction_arg(const std::string& text) {
    Point v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return Direction(std::move(v));
}

// Query window inferred from the model: distribution supports padded by 10%,
// Gaussians truncated at 4 sigma for display purposes.
inline Box model_bounding_box(const UncertainPointSet& model, double gaussian_k = 4.0) {
    Box b;
    b.lo.assign(model.dim, std::numeric_limits<double>::infinity());
    b.hi.assign(model.dim, -std::numeric_limits<double>::infinity());
    auto extend = [&](const Point& p, double pad) {
        for (std::size_t i = 0; i < model.dim; ++i) {
            b.lo[i] = std::min(b.lo[i], p[i] - pad);
            b.hi[i] = std::max(b.hi[i], p[i] + pad);
        }
    };
    for (const auto& d : model.points) {
        switch (d.kind) {
            case DistKind::discrete:
                for (const auto& s : d.support) extend(s.p, 0.0);
                break;
            case DistKind::gaussian: {
                double smax = 0.0;
                for (double s : d.sigma) smax = std::max(smax, s);
                extend(d.mean, gaussian_k * smax);
                break;
            }
            case DistKind::uniform_disk:
                extend(d.center, d.radius);
                break;
            case DistKind::uniform_polygon:
                for (const Point& v : d.vertices) extend(v, 0.0);
                break;
        }
    }
    for (std::size_t i = 0; i < model.dim; ++i) {
        const double pad = 0.1 * std::max(1e-9, b.hi[i] - b.lo[i]);
        b.lo[i] -= pad;
        b.hi[i] += pad;
    }
    return b;
}

// The cylinder experiment model: n Gaussian centers on the surface of a
// cylinder piece (radius 1, axis along z), isotropic sigma.
inline UncertainPointSet cylinder_model(std::size_t n, double radius, double axis_length,
                                        double sigma, std::uint64_t seed) {
    UncertainPointSet model;
    model.dim = 3;
    SeededRng rng(seed, 0xc71ULL);
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform01() * two_pi;
        const double z = rng.uniform01() * axis_length;
        PointDistribution d;
        d.kind = DistKind::gaussian;
        d.dim = 3;
        d.mean = {radius * std::cos(a), radius * std::sin(a), z};
        d.sigma = {sigma, sigma, sigma};
        model.points.push_back(std::move(d));
    }
    return model;
}

namespace detail {

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path);
    require(out.good(), "cannot open output file: " + path);
    fn(out);
    require(out.good(), "failed writing output file: " + path);
}

inline std::vector<double> parse_level_list(const std::string& text) {
    std::vector<double> levels;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.push_back(std::stod(tok));
    return levels;
}

// Column-aligned CSV for the cylinder experiment outputs.
inline void write_columns_csv(std::ostream& os, const std::string& header_comment,
                              const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& columns) {
    os << header_comment << "\n" << std::setprecision(17);
    for (std::size_t i = 0; i < names.size(); ++i)
        os << (i ? "," : "") << names[i];
    os << "\n";
    std::size_t rows = 0;
    for (const auto& c : columns) rows = std::max(rows, c.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) os << ",";
            if (r < columns[c].size()) os << columns[c][r];
        }
        os << "\n";
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cylinder experiment: eps- and (eps,alpha)-quantizations side by side

struct CylinderExperimentConfig {
    std::size_t n = 5000;
    double radius = 1.0;
    double axis_length = 10.0;
    double sigma = 3.0;
    double epsilon = 0.2;
    double delta = 0.05;
    std::size_t m = 40;
    std::size_t kernel_cap = 40;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out_dir = ".";
};

struct CylinderExperimentResult {
    std::size_t total_kernel_points = 0;
    std::vector<std::string> stat_names;                  // diam, dwid, seb2-radius
    std::vector<std::vector<double>> eps_quantizations;   // per stat, size ceil(2/eps)
    std::vector<std::vector<double>> eps_alpha_quantizations;
    std::vector<std::vector<double>> full_values;         // per stat, sorted, size m
    std::vector<std::vector<double>> kernel_values;       // per stat, sorted, size m
    std::vector<double> measured_alpha;                   // per kernel
    std::string eps_csv_path, eps_alpha_csv_path;
};

inline CylinderExperimentResult run_cylinder_experiment(const CylinderExperimentConfig& cfg) {
    const UncertainPointSet model =
        cylinder_model(cfg.n, cfg.radius, cfg.axis_length, cfg.sigma, cfg.seed);
    EpsAlphaKernelParams kp;
    kp.epsilon = cfg.epsilon;
    kp.delta = cfg.delta;
    kp.alpha = 0.1;  // nominal; the cap drives the construction
    kp.m_override = cfg.m;
    kp.kernel_cap = cfg.kernel_cap;
    EpsAlphaKernel ka = build_eps_alpha_kernel(model, kp, cfg.seed, /*test_mode=*/true,
                                               cfg.threads);

    CylinderExperimentResult res;
    res.total_kernel_points = ka.total_points();
    for (const auto& kj : ka.kernels) res.measured_alpha.push_back(kj.alpha);

    const Direction axis({0.0, 0.0, 1.0});
    const std::vector<StatisticDescriptor> stats = {
        StatisticDescriptor::parse("diam"),
        StatisticDescriptor::parse("dwid", axis),
        StatisticDescriptor::parse("seb2-radius"),
    };
    for (const auto& st : stats) {
        res.stat_names.push_back(st.name());
        std::vector<double> full(ka.full_sets.size()), kern(ka.kernels.size());
        parallel_for(ka.full_sets.size(), cfg.threads, [&](std::size_t j) {
            full[j] = st.eval_scalar(ka.full_sets[j]);
            kern[j] = st.eval_scalar(ka.kernels[j].points);
        });
        std::sort(full.begin(), full.end());
        std::sort(kern.begin(), kern.end());
        res.eps_quantizations.push_back(reduce_univariate(full, cfg.epsilon).values);
        res.eps_alpha_quantizations.push_back(reduce_univariate(kern, cfg.epsilon).values);
        res.full_values.push_back(std::move(full));
        res.kernel_values.push_back(std::move(kern));
    }

    std::ostringstream header;
    header << "# experiment=cylinder n=" << cfg.n << " radius=" << cfg.radius
           << " axis_length=" << cfg.axis_length << " sigma=" << cfg.sigma
           << " epsilon=" << cfg.epsilon << " delta=" << cfg.delta << " m=" << cfg.m
           << " kernel_cap=" << cfg.kernel_cap << " seed=" << cfg.seed
           << " kernel_points=" << res.total_kernel_points;
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    res.eps_csv_path = (fs::path(cfg.out_dir) / "cylinder_eps_quantizations.csv").string();
    res.eps_alpha_csv_path =
        (fs::path(cfg.out_dir) / "cylinder_eps_alpha_quantizations.csv").string();
    detail::write_file(res.eps_csv_path, [&](std::ostream& os) {
        detail::write_columns_csv(os, header.str() + " kind=eps", res.stat_names,
                                  res.eps_quantizations);
    });
    detail::write_file(res.eps_alpha_csv_path, [&](std::ostream& os) {
        detail::write_columns_csv(os, header.str() + " kind=eps-alpha", res.stat_names,
                                  res.eps_alpha_quantizations);
    });
    return res;
}

// ---------------------------------------------------------------------------
// CLI entry point

inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"approximate distributions of extent measures for uncertain point sets"};
    app.require_subcommand(1);
    app.fallthrough();  // --threads may follow the subcommand

    unsigned threads = default_thread_count();
    app.add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);

    const auto in_unit = CLI::Range(1e-12, 1.0 - 1e-12);

    // quantize
    auto* q = app.add_subcommand("quantize", "Monte-Carlo eps-quantization of a statistic");
    std::string q_model, q_stat, q_dir, q_out;
    double q_eps = 0.1, q_delta = 0.05, q_const = 0.5;
    std::uint64_t q_seed = 1;
    std::size_t q_m = 0;
    bool q_no_reduce = false;
    q->add_option("--model", q_model, "model JSON path")->required();
    q->add_option("--stat", q_stat, "statistic name")->required();
    q->add_option("--dir", q_dir, "direction for dwid, comma separated");
    q->add_option("--eps", q_eps, "epsilon in (0,1)")->required()->check(in_unit);
    q->add_option("--delta", q_delta, "delta in (0,1)")->check(in_unit);
    q->add_option("--seed", q_seed, "master seed");
    q->add_option("--trials", q_m, "override trial count m");
    q->add_option("--sample-constant", q_const, "constant C in the trial formula");
    q->add_option("--out", q_out, "output CSV path")->required();
    q->add_flag("--no-reduce", q_no_reduce, "emit raw sorted trial values");

    // kernel
    auto* kc = app.add_subcommand("kernel", "(eps,alpha)-kernel quantization queries");
    std::string k_model, k_stat = "dwid", k_dir, k_out, k_save;
    double k_eps = 0.2, k_alpha = 0.1, k_delta = 0.05;
    std::uint64_t k_seed = 1;
    std::size_t k_m = 0, k_cap = 0;
    kc->add_option("--model", k_model, "model JSON path")->required();
    kc->add_option("--stat", k_stat, "diam | dwid | seb2-radius | aabb-widths");
    kc->add_option("--dir", k_dir, "direction for dwid");
    kc->add_option("--eps", k_eps, "epsilon in (0,1)")->required()->check(in_unit);
    kc->add_option("--alpha", k_alpha, "alpha in (0,1)")->required()->check(in_unit);
    kc->add_option("--delta", k_delta, "delta in (0,1)")->check(in_unit);
    kc->add_option("--seed", k_seed, "master seed");
    kc->add_option("--trials", k_m, "override kernel count m");
    kc->add_option("--cap", k_cap, "per-kernel size cap (overrides alpha-driven net)");
    kc->add_option("--out", k_out, "output CSV path")->required();
    kc->add_option("--save-kernels", k_save, "also dump kernels as JSON");

    // sip
    auto* sc = app.add_subcommand("sip", "shape inclusion probability field and isolines");
    std::string s_model, s_family = "seb2", s_bbox, s_levels, s_grid_out, s_svg_out;
    double s_eps = 0.1, s_delta = 0.05;
    std::uint64_t s_seed = 1;
    std::size_t s_m = 0, s_res = 256;
    sc->add_option("--model", s_model, "model JSON path")->required();
    sc->add_option("--family", s_family, "seb2 | aabb");
    sc->add_option("--eps", s_eps, "epsilon in (0,1)")->required()->check(in_unit);
    sc->add_option("--delta", s_delta, "delta in (0,1)")->check(in_unit);
    sc->add_option("--seed", s_seed, "master seed");
    sc->add_option("--m", s_m, "override shape count m");
    sc->add_option("--bbox", s_bbox, "query window x0,y0,x1,y1 (default: from model)");
    sc->add_option("--resolution", s_res, "grid nodes per axis")->check(CLI::Range(8, 4096));
    sc->add_option("--levels", s_levels, "isoline levels, comma separated");
    sc->add_option("--out-grid", s_grid_out, "grid CSV path");
    sc->add_option("--out-svg", s_svg_out, "isoline SVG path");

    // exact
    auto* ec = app.add_subcommand("exact", "deterministic valid-basis quantization");
    std::string e_model, e_samples, e_family, e_out, e_save;
    double e_eps = 0.5, e_quant_eps = 0.0;
    std::uint64_t e_seed = 1;
    bool e_oracle = false;
    ec->add_option("--model", e_model, "model JSON path (discrete/uniform-polygon)");
    ec->add_option("--samples", e_samples, "sample family JSON path");
    ec->add_option("--family", e_family,
                   "aabb-perimeter | aabb-volume | aabb-widths | seb2-radius")
        ->required();
    ec->add_option("--eps", e_eps, "epsilon for the per-point samples")->check(in_unit);
    ec->add_option("--seed", e_seed, "lattice shift seed");
    ec->add_flag("--oracle", e_oracle, "cross-check against brute-force enumeration");
    ec->add_option("--quantize-eps", e_quant_eps, "also reduce to ceil(2/eps) values");
    ec->add_option("--out", e_out, "output CSV path")->required();
    ec->add_option("--save-samples", e_save, "dump the sample family as JSON");

    // experiment-cylinder
    auto* xc = app.add_subcommand("experiment-cylinder",
                                  "cylinder-piece Gaussian experiment replication");
    CylinderExperimentConfig xcfg;
    xc->add_option("--n", xcfg.n, "number of uncertain points");
    xc->add_option("--radius", xcfg.radius, "cylinder radius");
    xc->add_option("--axis-length", xcfg.axis_length, "cylinder axis length");
    xc->add_option("--sigma", xcfg.sigma, "isotropic Gaussian sigma");
    xc->add_option("--eps", xcfg.epsilon, "epsilon in (0,1)")->check(in_unit);
    xc->add_option("--trials", xcfg.m, "trial count m");
    xc->add_option("--cap", xcfg.kernel_cap, "per-kernel size cap");
    xc->add_option("--seed", xcfg.seed, "master seed");
    xc->add_option("--out-dir", xcfg.out_dir, "output directory");

    // center
    auto* cc = app.add_subcommand("center", "approximate center point of the model");
    std::string c_model;
    std::uint64_t c_seed = 1;
    std::size_t c_sample = 32;
    cc->add_option("--model", c_model, "model JSON path")->required();
    cc->add_option("--seed", c_seed, "master seed");
    cc->add_option("--sample-size", c_sample, "per-distribution sample size");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (q->parsed()) {
            const UncertainPointSet model = load_model(q_model);
            std::optional<Direction> dir;
            if (!q_dir.empty()) dir = parse_direction_arg(q_dir);
            const auto stat = StatisticDescriptor::parse(q_stat, dir);
            QuantizationParams params;
            params.epsilon = q_eps;
            params.delta = q_delta;
            params.m_override = q_m;
            params.sample_constant = q_const;
            CsvHeader h{stat.name(), q_eps, q_delta, 0, q_seed};
            if (stat.arity(model.dim) == 1) {
                h.m = params.trials_univariate();
                UnivariateQuantization r;
                if (q_no_reduce)
                    r.values = monte_carlo_values(model, stat, h.m, q_seed, threads);
                else
                    r = build_univariate(model, stat, params, q_seed, threads);
                detail::write_file(q_out, [&](std::ostream& os) { write_csv(os, r, h); });
            } else {
                h.m = params.trials_kvariate(stat.arity(model.dim));
                const auto r = build_kvariate(model, stat, params, q_seed, threads);
                detail::write_file(q_out, [&](std::ostream& os) { write_csv(os, r, h); });
            }
            return 0;
        }

        if (kc->parsed()) {
            const UncertainPointSet model = load_model(k_model);
            EpsAlphaKernelParams params;
            params.epsilon = k_eps;
            params.alpha = k_alpha;
            params.delta = k_delta;
            params.m_override = k_m;
            params.kernel_cap = k_cap;
            const EpsAlphaKernel ka =
                build_eps_alpha_kernel(model, params, k_seed, false, threads);
            if (!k_save.empty())
                detail::write_file(k_save,
                                   [&](std::ostream& os) { os << serialize_kernels(ka); });
            std::optional<Direction> dir;
            if (!k_dir.empty()) dir = parse_direction_arg(k_dir);
            const auto stat = StatisticDescriptor::parse(k_stat, dir);
            CsvHeader h{stat.name(), k_eps, k_delta, ka.kernels.size(), k_seed};
            if (stat.stat == Stat::dwid) {
                const auto widths = width_quantization(ka, *stat.direction);
                const auto reduced = reduce_univariate(widths.values, k_eps);
                detail::write_file(k_out, [&](std::ostream& os) { write_csv(os, reduced, h); });
            } else {
                const auto r = kernel_function_quantization(ka, stat);
                if (r.k == 1) {
                    std::vector<double> v(r.points.size());
                    for (std::size_t i = 0; i < r.points.size(); ++i) v[i] = r.points[i][0];
                    const auto reduced = reduce_univariate(v, k_eps);
                    detail::write_file(k_out,
                                       [&](std::ostream& os) { write_csv(os, reduced, h); });
                } else {
                    detail::write_file(k_out, [&](std::ostream& os) { write_csv(os, r, h); });
                }
            }
            return 0;
        }

        if (sc->parsed()) {
            const UncertainPointSet model = load_model(s_model);
            SipParams params;
            params.epsilon = s_eps;
            params.delta = s_delta;
            params.m_override = s_m;
            const ShapeFamily family = parse_family(s_family);
            const ShapeSet shapes = build_sip(model, family, params, s_seed, false, threads);
            require(!s_grid_out.empty() || !s_svg_out.empty(),
                    "sip: provide --out-grid and/or --out-svg");
            require(model.dim == 2, "sip grid output requires a 2D model");
            Box bbox;
            if (!s_bbox.empty()) {
                const auto v = detail::parse_level_list(s_bbox);
                require(v.size() == 4, "bbox must be x0,y0,x1,y1");
                bbox.lo = {v[0], v[1]};
                bbox.hi = {v[2], v[3]};
            } else {
                bbox = model_bounding_box(model);
            }
            const GridField grid = sip_grid(shapes, bbox, s_res, threads);
            CsvHeader h{std::string("sip-") + family_name(family), s_eps, s_delta,
                        shapes.shapes.size(), s_seed};
            if (!s_grid_out.empty())
                detail::write_file(s_grid_out,
                                   [&](std::ostream& os) { write_grid_csv(os, grid, h); });
            if (!s_svg_out.empty()) {
                const std::vector<double> levels = s_levels.empty()
                                                       ? default_isoline_levels()
                                                       : detail::parse_level_list(s_levels);
                const IsolineSet iso = extract_isolines(grid, levels);
                detail::write_file(s_svg_out,
                                   [&](std::ostream& os) { write_isolines_svg(os, iso); });
            }
            return 0;
        }

        if (ec->parsed()) {
            require(e_model.empty() != e_samples.empty(),
                    "exact: provide exactly one of --model or --samples");
            const DetFamily family = parse_det_family(e_family);
            SampleFamily fam;
            if (!e_samples.empty()) {
                fam = load_sample_family(e_samples);
            } else {
                const UncertainPointSet model = load_model(e_model);
                fam = build_afn_samples(model, family, e_eps, e_seed);
            }
            if (!e_save.empty())
                detail::write_file(e_save, [&](std::ostream& os) {
                    os << serialize_sample_family(fam);
                });
            if (!has_constant_basis(family)) {
                // Basis size n: only the full enumeration applies.
                require(!e_oracle,
                        std::string("family ") + det_family_name(family) +
                            " is computed by brute-force enumeration; --oracle "
                            "does not apply");
                const WeightedCdf w = brute_force_cdf(fam, family);
                detail::write_file(
                    e_out, [&](std::ostream& os) { write_cdf_csv(os, w, family, fam); });
                if (e_quant_eps > 0.0) {
                    const auto r = cdf_to_quantization(w, e_quant_eps);
                    CsvHeader h{det_family_name(family), e_quant_eps, 0.0, w.size(),
                                e_seed};
                    detail::write_file(e_out + ".quantization.csv",
                                       [&](std::ostream& os) { write_csv(os, r, h); });
                }
                return 0;
            }
            const WeightedCdf w = valid_basis_quantization(fam, family);
            if (e_oracle) {
                const WeightedCdf oracle = brute_force_cdf(fam, family);
                bool match = w.size() == oracle.size() && w.k == oracle.k;
                for (std::size_t i = 0; match && i < w.size(); ++i) {
                    for (std::size_t j = 0; j < w.k; ++j)
                        if (std::abs(w.row(i)[j] - oracle.row(i)[j]) > 1e-9) match = false;
                    if (std::abs(w.masses[i] - oracle.masses[i]) > 1e-9) match = false;
                }
                std::cout << (match ? "oracle match" : "oracle mismatch") << "\n";
                if (!match) return 1;
            }
            detail::write_file(e_out,
                               [&](std::ostream& os) { write_cdf_csv(os, w, family, fam); });
            if (e_quant_eps > 0.0) {
                require(w.k == 1, "quantize-eps requires a univariate family");
                const auto r = cdf_to_quantization(w, e_quant_eps);
                const std::string qpath = e_out + ".quantization.csv";
                CsvHeader h{det_family_name(family), e_quant_eps, 0.0, w.size(), e_seed};
                detail::write_file(qpath, [&](std::ostream& os) { write_csv(os, r, h); });
            }
            return 0;
        }

        if (xc->parsed()) {
            xcfg.threads = threads;
            const auto res = run_cylinder_experiment(xcfg);
            std::cout << "kernel points total: " << res.total_kernel_points << "\n"
                      << "wrote " << res.eps_csv_path << "\n"
                      << "wrote " << res.eps_alpha_csv_path << "\n";
            return 0;
        }

        if (cc->parsed()) {
            const UncertainPointSet model = load_model(c_model);
            const CenterPoint cp = center_point(model, c_seed, c_sample);
            std::cout << std::setprecision(17) << "qbar";
            for (double v : cp.qbar) std::cout << " " << v;
            std::cout << "\n";
            return 0;
        }
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace uex
