#include <catch_amalgamated.hpp>

#include "uex/deterministic.hpp"

using namespace uex;

namespace {

SampleFamily random_family(SeededRng& rng, std::size_t n, std::size_t max_size) {
    SampleFamily f;
    f.dim = 2;
    for (std::size_t i = 0; i < n; ++i) {
        PointSet s;
        const std::size_t size = 1 + rng.index(max_size);
        for (std::size_t j = 0; j < size; ++j)
            s.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        f.sets.push_back(std::move(s));
    }
    return f;
}

void check_oracle_equivalence(const SampleFamily& f, DetFamily family) {
    const WeightedCdf a = valid_basis_quantization(f, family);
    const WeightedCdf b = brute_force_cdf(f, family);
    REQUIRE(a.k == b.k);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.k; ++j)
            CHECK(a.row(i)[j] == Catch::Approx(b.row(i)[j]).margin(1e-9));
        CHECK(a.masses[i] == Catch::Approx(b.masses[i]).margin(1e-9));
    }
    CHECK(std::abs(a.mass() - 1.0) <= 1e-9);
    CHECK(std::abs(b.mass() - 1.0) <= 1e-9);
}

}  // namespace

TEST_CASE("lattice sample size band and discrepancy") {
    const PointSet square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    SeededRng rng(51);
    const double eps = 0.1, nu = 4.0;
    const PointSet m = lattice_eps_sample(square, eps, nu, rng);
    const std::size_t target = lattice_target_size(eps, nu);
    CHECK(m.size() >= target);
    CHECK(m.size() <= 4 * target);
    for (const Point& p : m) CHECK(point_in_convex_polygon(p, square, 1e-12));

    // Discrepancy against 200 random axis-aligned rectangles with exact areas.
    SeededRng qr(52);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        double x0 = qr.uniform(0, 1), x1 = qr.uniform(0, 1);
        double y0 = qr.uniform(0, 1), y1 = qr.uniform(0, 1);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        std::size_t inside = 0;
        for (const Point& p : m)
            inside += p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
        const double frac = static_cast<double>(inside) / static_cast<double>(m.size());
        const double area = (x1 - x0) * (y1 - y0);  // clip of the unit square
        worst = std::max(worst, std::abs(frac - area));
    }
    CHECK(worst <= eps);
}

TEST_CASE("lattice sample scale invariance") {
    const PointSet square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const PointSet big = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    SeededRng r1(53), r2(53);
    const auto m1 = lattice_eps_sample(square, 0.2, 4.0, r1);
    const auto m2 = lattice_eps_sample(big, 0.2, 4.0, r2);
    CHECK(m2.size() >= m1.size() / 2);
    CHECK(m2.size() <= 2 * m1.size());
}

TEST_CASE("lattice shifts differ across seeds but both cover the region") {
    const PointSet square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    SeededRng r1(54), r2(55);
    const auto m1 = lattice_eps_sample(square, 0.15, 4.0, r1);
    const auto m2 = lattice_eps_sample(square, 0.15, 4.0, r2);
    CHECK(m1[0] != m2[0]);
    for (const auto* m : {&m1, &m2}) {
        std::size_t left = 0;
        for (const Point& p : *m) left += p[0] <= 0.5;
        CHECK(std::abs(static_cast<double>(left) / m->size() - 0.5) <= 0.15);
    }
    CHECK_THROWS_AS(lattice_eps_sample({{0, 0}, {1, 0}, {2, 0}}, 0.1, 4.0, r1), error);
}

TEST_CASE("build_afn_samples on discrete models perturbs supports") {
    UncertainPointSet model;
    model.dim = 2;
    for (int i = 0; i < 2; ++i) {
        PointDistribution d;
        d.kind = DistKind::discrete;
        d.dim = 2;
        d.support = {{{0.0, 0.0}, 0.5}, {{1.0, double(i)}, 0.5}};  // shared (0,0)
        model.points.push_back(std::move(d));
    }
    const SampleFamily f = build_afn_samples(model, DetFamily::aabb_volume, 0.5, 3);
    CHECK(f.source == "discrete");
    CHECK(validate_general_position(f, DetFamily::aabb_volume).ok);
    // Perturbation stays tiny.
    CHECK(std::abs(f.sets[0][0][0]) <= 1e-6);
    CHECK(std::abs(f.sets[0][0][1]) <= 1e-6);
}

TEST_CASE("build_afn_samples sizes for uniform squares") {
    UncertainPointSet model;
    model.dim = 2;
    for (int i = 0; i < 3; ++i) {
        PointDistribution d;
        d.kind = DistKind::uniform_polygon;
        d.dim = 2;
        const double off = 2.0 * i;
        d.vertices = {{off, 0}, {off + 1, 0}, {off + 1, 1}, {off, 1}};
        model.points.push_back(std::move(d));
    }
    const double eps = 0.3;
    const SampleFamily f = build_afn_samples(model, DetFamily::aabb_perimeter, eps, 5);
    CHECK(f.source == "lattice");
    const std::size_t target = lattice_target_size(eps / 3.0, 4.0);
    for (const auto& s : f.sets) {
        CHECK(s.size() >= target);
        CHECK(s.size() <= 4 * target);
    }
    CHECK(validate_general_position(f, DetFamily::aabb_perimeter).ok);
}

TEST_CASE("build_afn_samples rejects unbounded and non-polygonal components") {
    UncertainPointSet model;
    model.dim = 2;
    PointDistribution g;
    g.kind = DistKind::gaussian;
    g.dim = 2;
    g.mean = {0, 0};
    g.sigma = {1, 1};
    model.points = {g};
    CHECK_THROWS_WITH(build_afn_samples(model, DetFamily::aabb_volume, 0.5, 1),
                      Catch::Matchers::ContainsSubstring("truncate first"));

    PointDistribution disk;
    disk.kind = DistKind::uniform_disk;
    disk.dim = 2;
    disk.center = {0, 0};
    disk.radius = 1.0;
    model.points = {disk};
    CHECK_THROWS_WITH(build_afn_samples(model, DetFamily::aabb_volume, 0.5, 1),
                      Catch::Matchers::ContainsSubstring("polygon"));

    CHECK_THROWS_WITH(build_afn_samples(model, DetFamily::seb2_radius, 0.5, 1),
                      Catch::Matchers::ContainsSubstring("axis-aligned"));
}

TEST_CASE("general position validation reports violations with indices") {
    SampleFamily f;
    f.dim = 2;
    f.sets = {{{0.0, 0.0}, {1.0, 0.5}}, {{0.0, 0.0}}};
    const auto rep = validate_general_position(f, DetFamily::aabb_volume);
    CHECK_FALSE(rep.ok);
    CHECK(rep.message.find("set 0") != std::string::npos);
    CHECK(rep.message.find("set 1") != std::string::npos);

    SampleFamily single;
    single.dim = 2;
    single.sets = {{{0.25, 0.75}}};
    CHECK(validate_general_position(single, DetFamily::aabb_volume).ok);
    CHECK(validate_general_position(single, DetFamily::seb2_radius).ok);
}

TEST_CASE("concyclic quadruples across four sets are flagged") {
    SampleFamily f;
    f.dim = 2;
    // Four points on the unit circle, one per set.
    f.sets = {{{1.0, 0.0}}, {{0.0, 1.0}}, {{-1.0, 0.0}}, {{0.0, -1.0}}};
    const auto rep = validate_general_position(f, DetFamily::seb2_radius);
    CHECK_FALSE(rep.ok);
    CHECK(rep.message.find("concyclic") != std::string::npos);

    // Perturb one point off the circle: passes.
    f.sets[3][0] = {0.1, -0.9};
    CHECK(validate_general_position(f, DetFamily::seb2_radius).ok);
}

TEST_CASE("valid-basis quantization with a single uncertain point is the uniform law") {
    SeededRng rng(56);
    SampleFamily f = random_family(rng, 1, 5);
    for (DetFamily family :
         {DetFamily::aabb_perimeter, DetFamily::aabb_volume, DetFamily::seb2_radius}) {
        const WeightedCdf w = valid_basis_quantization(f, family);
        CHECK(std::abs(w.mass() - 1.0) <= 1e-12);
        // Singleton shapes are degenerate: every value is 0.
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(w.value1(i) == 0.0);
    }
}

TEST_CASE("valid-basis quantization equals brute force on fixed small families") {
    SeededRng rng(57);
    SECTION("aabb-volume, n=3, sizes 3") {
        SampleFamily f;
        f.dim = 2;
        for (int i = 0; i < 3; ++i) {
            PointSet s;
            for (int j = 0; j < 3; ++j) s.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
            f.sets.push_back(std::move(s));
        }
        check_oracle_equivalence(f, DetFamily::aabb_volume);
    }
    SECTION("seb2-radius, n=3, sizes 4") {
        SampleFamily f;
        f.dim = 2;
        for (int i = 0; i < 3; ++i) {
            PointSet s;
            for (int j = 0; j < 4; ++j) s.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
            f.sets.push_back(std::move(s));
        }
        check_oracle_equivalence(f, DetFamily::seb2_radius);
    }
    SECTION("aabb-widths is k-variate") {
        SampleFamily f;
        f.dim = 2;
        for (int i = 0; i < 3; ++i) {
            PointSet s;
            for (int j = 0; j < 3; ++j) s.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
            f.sets.push_back(std::move(s));
        }
        const WeightedCdf w = valid_basis_quantization(f, DetFamily::aabb_widths);
        CHECK(w.k == 2);
        check_oracle_equivalence(f, DetFamily::aabb_widths);
    }
}

TEST_CASE("valid-basis quantization equals brute force on randomized families") {
    SeededRng rng(58);
    const DetFamily families[] = {DetFamily::aabb_perimeter, DetFamily::aabb_volume,
                                  DetFamily::seb2_radius};
    for (int trial = 0; trial < 12; ++trial) {
        const SampleFamily f = random_family(rng, 1 + rng.index(4), 5);
        check_oracle_equivalence(f, families[trial % 3]);
    }
}

TEST_CASE("valid-basis quantization rejects general-position violations") {
    SampleFamily f;
    f.dim = 2;
    f.sets = {{{0.0, 0.0}}, {{0.0, 1.0}}};  // shared x coordinate
    CHECK_THROWS_WITH(valid_basis_quantization(f, DetFamily::aabb_volume),
                      Catch::Matchers::ContainsSubstring("general-position"));
}

TEST_CASE("brute force basics") {
    SampleFamily singletons;
    singletons.dim = 2;
    singletons.sets = {{{0.0, 0.25}}, {{3.0, 4.25}}};
    const WeightedCdf w = brute_force_cdf(singletons, DetFamily::seb2_radius);
    REQUIRE(w.size() == 1);
    CHECK(w.value1(0) == Catch::Approx(2.5));
    CHECK(w.masses[0] == 1.0);

    SeededRng rng(59);
    SampleFamily f;
    f.dim = 2;
    f.sets = {{{rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)}},
              {{rng.uniform(-1, 1), rng.uniform(-1, 1)},
               {rng.uniform(-1, 1), rng.uniform(-1, 1)},
               {rng.uniform(-1, 1), rng.uniform(-1, 1)}}};
    const WeightedCdf six = brute_force_cdf(f, DetFamily::aabb_perimeter);
    CHECK(six.size() == 6);
    for (std::size_t i = 0; i < six.size(); ++i)
        CHECK(six.masses[i] == Catch::Approx(1.0 / 6.0));
    CHECK(six.mass() == Catch::Approx(1.0));
}

TEST_CASE("cdf_to_quantization") {
    WeightedCdf point;
    point.k = 1;
    point.values = {5.0};
    point.masses = {1.0};
    const auto r1 = cdf_to_quantization(point, 0.3);
    for (double v : r1.values) CHECK(v == 5.0);

    WeightedCdf two;
    two.k = 1;
    two.values = {1.0, 2.0};
    two.masses = {0.5, 0.5};
    const auto r2 = cdf_to_quantization(two, 0.5);
    CHECK(r2.values == std::vector<double>{1, 1, 2, 2});

    // Random weighted CDFs stay within eps/2 in sup norm.
    SeededRng rng(60);
    for (int t = 0; t < 20; ++t) {
        WeightedCdf w;
        w.k = 1;
        const std::size_t atoms = 2 + rng.index(30);
        double total = 0.0;
        std::vector<double> mass(atoms);
        for (auto& m : mass) total += (m = rng.uniform(0.05, 1.0));
        double v = 0.0;
        for (std::size_t i = 0; i < atoms; ++i) {
            v += rng.uniform(0.01, 1.0);
            w.values.push_back(v);
            w.masses.push_back(mass[i] / total);
        }
        const double eps = 0.1 + 0.3 * rng.uniform01();
        const auto r = cdf_to_quantization(w, eps);
        UnivariateQuantization rq{r.values};
        double worst = 0.0;
        for (double t2 : w.values) {
            worst = std::max(worst, std::abs(eval_univariate(rq, t2) - w.cdf(t2)));
            const double before = std::nextafter(t2, -1e300);
            worst = std::max(worst, std::abs(eval_univariate(rq, before) - w.cdf(before)));
        }
        CHECK(worst <= eps / 2.0 + 1e-12);
    }
}

TEST_CASE("diameter and hull families run through the brute-force oracle only") {
    SeededRng rng(62);
    const SampleFamily f = random_family(rng, 3, 4);
    CHECK_THROWS_WITH(valid_basis_quantization(f, DetFamily::diam),
                      Catch::Matchers::ContainsSubstring("brute_force_cdf"));
    CHECK_THROWS_WITH(valid_basis_quantization(f, DetFamily::chull_area),
                      Catch::Matchers::ContainsSubstring("brute_force_cdf"));

    for (DetFamily family :
         {DetFamily::diam, DetFamily::chull_area, DetFamily::chull_perimeter}) {
        const WeightedCdf w = brute_force_cdf(f, family);
        CHECK(w.mass() == Catch::Approx(1.0));
        for (std::size_t i = 1; i < w.size(); ++i) CHECK(w.value1(i) > w.value1(i - 1));
    }

    // Spot check against a direct evaluation of one outcome.
    SampleFamily singles;
    singles.dim = 2;
    singles.sets = {{{0.0, 0.0}}, {{3.0, 0.0}}, {{0.0, 4.0}}};
    const WeightedCdf d = brute_force_cdf(singles, DetFamily::diam);
    REQUIRE(d.size() == 1);
    CHECK(d.value1(0) == Catch::Approx(5.0));
    const WeightedCdf a = brute_force_cdf(singles, DetFamily::chull_area);
    CHECK(a.value1(0) == Catch::Approx(6.0));
}

TEST_CASE("sample family JSON round trip") {
    SeededRng rng(61);
    const SampleFamily f = random_family(rng, 3, 4);
    const SampleFamily back = parse_sample_family(serialize_sample_family(f));
    CHECK(back.dim == f.dim);
    CHECK(back.sets == f.sets);
    CHECK_THROWS_WITH(parse_sample_family("{"),
                      Catch::Matchers::ContainsSubstring("malformed"));
}

TEST_CASE("lattice pipeline approximates a Monte-Carlo reference") {
    // Two uniform squares and one discrete component; the deterministic CDF
    // from per-point samples must track a high-accuracy Monte-Carlo estimate.
    UncertainPointSet model;
    model.dim = 2;
    PointDistribution sq1;
    sq1.kind = DistKind::uniform_polygon;
    sq1.dim = 2;
    sq1.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    PointDistribution sq2 = sq1;
    sq2.vertices = {{1.5, 0.5}, {2.5, 0.5}, {2.5, 1.5}, {1.5, 1.5}};
    PointDistribution disc;
    disc.kind = DistKind::discrete;
    disc.dim = 2;
    disc.support = {{{0.5, 2.0}, 0.25}, {{1.0, 2.5}, 0.25}, {{2.0, 2.25}, 0.5}};
    model.points = {sq1, sq2, disc};

    const double eps = 0.9;
    const DetFamily family = DetFamily::aabb_perimeter;
    const SampleFamily f = build_afn_samples(model, family, eps, 7);
    const WeightedCdf w = valid_basis_quantization(f, family);
    CHECK(std::abs(w.mass() - 1.0) <= 1e-9);

    const std::size_t mc_trials = 200000;
    std::vector<double> mc(mc_trials);
    parallel_for(mc_trials, 2, [&](std::size_t i) {
        SeededRng rng(424242, i);
        mc[i] = aabb_stats(sample_point_set(model, rng)).boundary_measure;
    });
    std::sort(mc.begin(), mc.end());
    const double se = 0.5 / std::sqrt(static_cast<double>(mc_trials));
    const double lo = mc.front(), hi = mc.back();
    for (int probe = 0; probe < 20; ++probe) {
        const double r = lo + (hi - lo) * probe / 19.0;
        const double mc_cdf =
            static_cast<double>(std::upper_bound(mc.begin(), mc.end(), r) - mc.begin()) /
            static_cast<double>(mc_trials);
        CHECK(std::abs(w.cdf(r) - mc_cdf) <= eps + 3.0 * se);
    }
}
