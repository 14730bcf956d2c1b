#include <catch_amalgamated.hpp>

#include "uex/sip.hpp"

using namespace uex;

namespace {

UncertainPointSet point_mass_model(const PointSet& pts) {
    UncertainPointSet m;
    m.dim = pts[0].size();
    for (const Point& p : pts) {
        PointDistribution d;
        d.kind = DistKind::discrete;
        d.dim = m.dim;
        d.support = {{p, 1.0}};
        m.points.push_back(std::move(d));
    }
    return m;
}

UncertainPointSet random_discrete_model(std::size_t n, std::size_t support,
                                        SeededRng& rng) {
    UncertainPointSet m;
    m.dim = 2;
    for (std::size_t i = 0; i < n; ++i) {
        PointDistribution d;
        d.kind = DistKind::discrete;
        d.dim = 2;
        std::vector<double> w(support);
        double total = 0.0;
        for (auto& x : w) total += (x = rng.uniform(0.2, 1.0));
        for (std::size_t s = 0; s < support; ++s)
            d.support.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, w[s] / total});
        m.points.push_back(std::move(d));
    }
    return m;
}

}  // namespace

TEST_CASE("point-mass sip repeats one shape") {
    const auto model = point_mass_model({{0, 0}, {2, 0}, {1, 2}});
    SipParams params;
    params.epsilon = 0.2;
    const ShapeSet s = build_sip(model, ShapeFamily::seb2_ball, params, 7);
    REQUIRE(s.shapes.size() == params.trials());
    for (const auto& sh : s.shapes) {
        CHECK(sh.ball.center == s.shapes[0].ball.center);
        CHECK(sh.ball.radius == s.shapes[0].ball.radius);
    }
    CHECK(eval_sip(s, s.shapes[0].ball.center) == 1.0);
    CHECK(eval_sip(s, {100.0, 100.0}) == 0.0);
}

TEST_CASE("sip trial count follows the formula and supports overrides") {
    SipParams params;
    params.epsilon = 0.1;
    params.delta = 0.05;
    const double expected = std::ceil(0.5 / 0.01 * std::log(1.0 / (0.1 * 0.05)));
    CHECK(params.trials() == static_cast<std::size_t>(expected));

    // Figure-style explicit shape counts.
    SeededRng rng(41);
    const auto model = random_discrete_model(5, 2, rng);
    SipParams fig;
    fig.m_override = 5000;
    const ShapeSet s = build_sip(model, ShapeFamily::seb2_ball, fig, 3);
    CHECK(s.shapes.size() == 5000);
    SipParams figbox;
    figbox.m_override = 25000;
    const ShapeSet sb = build_sip(model, ShapeFamily::aabb_box, figbox, 3);
    CHECK(sb.shapes.size() == 25000);
}

TEST_CASE("sip shapes are the true optima of their generating sets") {
    SeededRng rng(42);
    const auto model = random_discrete_model(4, 3, rng);
    SipParams params;
    params.epsilon = 0.25;
    const ShapeSet s =
        build_sip(model, ShapeFamily::seb2_ball, params, 11, /*test_mode=*/true);
    REQUIRE(s.generating_sets.size() == s.shapes.size());
    for (std::size_t j = 0; j < s.shapes.size(); ++j) {
        const SebResult ref = seb2(s.generating_sets[j]);
        CHECK(s.shapes[j].ball.radius == ref.ball.radius);
        for (const Point& p : s.generating_sets[j])
            CHECK(s.shapes[j].contains(p));
    }
    const ShapeSet sb =
        build_sip(model, ShapeFamily::aabb_box, params, 11, /*test_mode=*/true);
    for (std::size_t j = 0; j < sb.shapes.size(); ++j) {
        const AabbStats ref = aabb_stats(sb.generating_sets[j]);
        CHECK(sb.shapes[j].box.lo == ref.box.lo);
        CHECK(sb.shapes[j].box.hi == ref.box.hi);
    }
}

TEST_CASE("sip matches the enumeration oracle at random queries") {
    SeededRng rng(43);
    const auto model = random_discrete_model(3, 3, rng);
    SipParams params;
    params.epsilon = 0.15;
    params.delta = 0.05;
    const ShapeSet s = build_sip(model, ShapeFamily::seb2_ball, params, 19);

    const auto outcomes = enumerate_support(model);
    std::vector<SummarizingShape> exact_shapes;
    for (const auto& o : outcomes)
        exact_shapes.push_back(summarize(ShapeFamily::seb2_ball, o.points));
    std::size_t bad = 0;
    for (int t = 0; t < 100; ++t) {
        const Point x = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        double exact = 0.0;
        for (std::size_t i = 0; i < outcomes.size(); ++i)
            if (exact_shapes[i].contains(x)) exact += outcomes[i].prob;
        bad += std::abs(eval_sip(s, x) - exact) > params.epsilon;
    }
    CHECK(bad == 0);
}

TEST_CASE("constant field has no isolines") {
    const auto model = point_mass_model({{0, 0}, {1, 0}, {0.5, 1}});
    SipParams params;
    params.m_override = 50;
    const ShapeSet s = build_sip(model, ShapeFamily::seb2_ball, params, 1);
    // Window strictly inside the unique shape: the field is constant 1, so
    // no level below 1 produces a curve.
    Box bbox{{0.4, 0.4}, {0.6, 0.5}};
    const GridField g = sip_grid(s, bbox, 16);
    for (double v : g.values) CHECK(v == 1.0);
    for (double level : {0.9, 0.5, 0.1}) {
        const IsolineSet iso = extract_isolines(g, {level});
        CHECK(iso.isolines[0].empty());
    }
}

TEST_CASE("contours exiting the window close along the frame") {
    // Single point-mass ball centered at the window's left edge: the 0.5
    // curve leaves the window and must be closed with frame segments.
    const auto model = point_mass_model({{0, 0}, {0, 2}});
    SipParams params;
    params.m_override = 20;
    const ShapeSet s = build_sip(model, ShapeFamily::seb2_ball, params, 1);
    Box bbox{{-0.5, -2.0}, {3.0, 4.0}};
    const GridField g = sip_grid(s, bbox, 48);
    const IsolineSet iso = extract_isolines(g, {0.5});
    REQUIRE(iso.isolines[0].size() >= 1);
    for (const auto& loop : iso.isolines[0]) {
        REQUIRE(loop.size() >= 4);
        CHECK(loop.front() == loop.back());
    }
}

TEST_CASE("isolines of a radial field are closed, single, and nested") {
    UncertainPointSet model;
    model.dim = 2;
    PointDistribution g;
    g.kind = DistKind::gaussian;
    g.dim = 2;
    g.mean = {0, 0};
    g.sigma = {1, 1};
    model.points.assign(3, g);
    SipParams params;
    params.m_override = 400;
    const ShapeSet s = build_sip(model, ShapeFamily::seb2_ball, params, 5);
    Box bbox{{-8, -8}, {8, 8}};
    const GridField field = sip_grid(s, bbox, 96);
    const IsolineSet iso = extract_isolines(field, {0.7, 0.3});
    REQUIRE(iso.isolines.size() == 2);
    REQUIRE(iso.isolines[0].size() == 1);
    REQUIRE(iso.isolines[1].size() == 1);
    const Polyline& inner = iso.isolines[0][0];
    const Polyline& outer = iso.isolines[1][0];
    CHECK(inner.front() == inner.back());
    CHECK(outer.front() == outer.back());
    // Nesting: every 0.7-isoline vertex lies inside the 0.3 polygon.
    PointSet outer_poly(outer.begin(), outer.end() - 1);
    if (polygon_area(outer_poly) < 0)
        std::reverse(outer_poly.begin(), outer_poly.end());
    for (const Point& p : inner) CHECK(point_in_convex_polygon(p, outer_poly, 1e-9));
}

TEST_CASE("marching squares segments bracket the level") {
    SeededRng rng(44);
    const auto model = random_discrete_model(3, 2, rng);
    SipParams params;
    params.m_override = 64;
    const ShapeSet s = build_sip(model, ShapeFamily::aabb_box, params, 9);
    Box bbox{{-1.5, -1.5}, {1.5, 1.5}};
    const GridField g = sip_grid(s, bbox, 32);
    const double level = 0.5;
    const IsolineSet iso = extract_isolines(g, {level});
    const double dx = (bbox.hi[0] - bbox.lo[0]) / 31.0;
    const double dy = (bbox.hi[1] - bbox.lo[1]) / 31.0;
    auto grid_value = [&](std::ptrdiff_t ix, std::ptrdiff_t iy) {
        ix = std::clamp<std::ptrdiff_t>(ix, 0, 31);
        iy = std::clamp<std::ptrdiff_t>(iy, 0, 31);
        return g.at(ix, iy);
    };
    std::size_t segments = 0;
    for (const auto& loop : iso.isolines[0]) {
        for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
            ++segments;
            // Midpoint of the segment identifies the crossed cell; its four
            // corners must bracket the level.
            const double mx = (loop[i][0] + loop[i + 1][0]) / 2.0;
            const double my = (loop[i][1] + loop[i + 1][1]) / 2.0;
            const auto cx = static_cast<std::ptrdiff_t>(
                std::floor((mx - bbox.lo[0]) / dx + 1e-9));
            const auto cy = static_cast<std::ptrdiff_t>(
                std::floor((my - bbox.lo[1]) / dy + 1e-9));
            double lo = 2.0, hi = -1.0;
            for (std::ptrdiff_t ox = 0; ox <= 1; ++ox)
                for (std::ptrdiff_t oy = 0; oy <= 1; ++oy) {
                    const double v = grid_value(cx + ox, cy + oy);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            CHECK(lo < level);
            CHECK(hi >= level);
        }
    }
    CHECK(segments > 0);
}

TEST_CASE("levels are validated") {
    const auto model = point_mass_model({{0, 0}, {1, 1}});
    SipParams params;
    params.m_override = 10;
    const ShapeSet s = build_sip(model, ShapeFamily::aabb_box, params, 2);
    const GridField g = sip_grid(s, Box{{-1, -1}, {2, 2}}, 16);
    CHECK_THROWS_AS(extract_isolines(g, {}), error);
    CHECK_THROWS_AS(extract_isolines(g, {1.5}), error);
    CHECK_THROWS_AS(sip_grid(s, Box{{0, 0}, {0, 1}}, 16), error);
    CHECK_THROWS_AS(sip_grid(s, Box{{0, 0}, {1, 1}}, 4), error);
}

TEST_CASE("center point of identical point masses is that point") {
    UncertainPointSet model;
    model.dim = 2;
    PointDistribution d;
    d.kind = DistKind::discrete;
    d.dim = 2;
    d.support = {{{1.5, -0.5}, 1.0}};
    model.points.assign(8, d);
    const CenterPoint cp = center_point(model, 3);
    CHECK(cp.qbar == Point{1.5, -0.5});
    REQUIRE(cp.pbar.size() == 8);
    for (const Point& p : cp.pbar) CHECK(p == Point{1.5, -0.5});
}

TEST_CASE("center point lands in sampled convex hulls") {
    UncertainPointSet model;
    model.dim = 2;
    const std::size_t n = 24;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / n;
        PointDistribution d;
        d.kind = DistKind::gaussian;
        d.dim = 2;
        d.mean = {3.0 * std::cos(a), 3.0 * std::sin(a)};
        d.sigma = {1.0, 1.0};
        model.points.push_back(std::move(d));
    }
    const CenterPoint cp = center_point(model, 17);
    CHECK(norm(cp.qbar) < 3.0);  // inside the circle of means
    SeededRng rng(45);
    std::size_t contained = 0;
    for (int t = 0; t < 40; ++t) {
        const PointSet q = sample_point_set(model, rng);
        contained += point_in_convex_polygon(cp.qbar, convex_hull_2d(q), 1e-12);
    }
    CHECK(contained >= 39);
}

TEST_CASE("center point in three dimensions") {
    UncertainPointSet model;
    model.dim = 3;
    SeededRng seeding(46);
    for (int i = 0; i < 6; ++i) {
        PointDistribution d;
        d.kind = DistKind::gaussian;
        d.dim = 3;
        d.mean = {seeding.uniform(-1, 1), seeding.uniform(-1, 1), seeding.uniform(-1, 1)};
        d.sigma = {0.5, 0.5, 0.5};
        model.points.push_back(std::move(d));
    }
    const CenterPoint cp = center_point(model, 9, 16);
    CHECK(cp.qbar.size() == 3);
    CHECK(norm(cp.qbar) < 3.0);
}
