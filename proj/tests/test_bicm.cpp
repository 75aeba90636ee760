#include <doctest.h>

#include <array>
#include <cmath>

#include "debatenet/bicm.hpp"
#include "debatenet/error.hpp"
#include "support.hpp"

using namespace debatenet;

namespace {

DegreeSequence degrees_of(const BipartiteGraph& g) { return degree_sequence(g); }

double max_abs_diff(const std::vector<double>& a, const std::vector<std::int64_t>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - static_cast<double>(b[i])));
    return worst;
}

// Newton on the 2x2 system of a symmetric 3x3 fixture with top = bottom = [2,1,1].
// Symmetry gives x_k = y_k, so the unknowns are a (degree 2) and b (degree 1).
std::array<double, 2> symmetric_oracle() {
    auto f = [](double a, double b) {
        const double aa = a * a / (1 + a * a), ab = a * b / (1 + a * b), bb = b * b / (1 + b * b);
        return std::array<double, 2>{aa + 2 * ab - 2, ab + 2 * bb - 1};
    };
    double a = 1.0, b = 0.5;
    for (int it = 0; it < 100; ++it) {
        const auto r = f(a, b);
        const double h = 1e-7;
        const auto ra = f(a + h, b), rb = f(a, b + h);
        const double j00 = (ra[0] - r[0]) / h, j01 = (rb[0] - r[0]) / h;
        const double j10 = (ra[1] - r[1]) / h, j11 = (rb[1] - r[1]) / h;
        const double det = j00 * j11 - j01 * j10;
        a -= (j11 * r[0] - j01 * r[1]) / det;
        b -= (-j10 * r[0] + j00 * r[1]) / det;
    }
    return {a, b};
}

}  // namespace

TEST_CASE("empty graph fits to all zeros") {
    const auto m = fit_bicm({{0}, {0}});
    CHECK(m.probability(0, 0) == 0.0);
    CHECK(m.fit_residual() == 0.0);
}

TEST_CASE("unit degrees on two by two give one half everywhere") {
    const auto m = fit_bicm({{1, 1}, {1, 1}});
    for (NodeIndex i = 0; i < 2; ++i) {
        for (NodeIndex a = 0; a < 2; ++a) CHECK(m.probability(i, a) == doctest::Approx(0.5).epsilon(1e-8));
    }
}

TEST_CASE("degrees [2,1,1] / [2,2] are reproduced") {
    BicmOptions o;
    o.tol = 1e-12;
    const DegreeSequence ds{{2, 1, 1}, {2, 2}};
    const auto m = fit_bicm(ds, o);
    CHECK(max_abs_diff(m.expected_top_degrees(), ds.top) <= 1e-10);
    CHECK(max_abs_diff(m.expected_bottom_degrees(), ds.bottom) <= 1e-10);
    // top 0 links to both bottoms; the remaining unit degrees reduce to one unknown
    // z = x y with 2 z / (1 + z) = 1, so z = 1 and every other pair is 1/2
    CHECK(m.probability(0, 0) == 1.0);
    CHECK(m.probability(0, 1) == 1.0);
    CHECK(m.is_frozen(0, 0));
    for (NodeIndex i = 1; i < 3; ++i) {
        for (NodeIndex a = 0; a < 2; ++a) CHECK(m.probability(i, a) == doctest::Approx(0.5).epsilon(1e-10));
    }
}

TEST_CASE("interior solution matches an independent Newton solve") {
    BicmOptions o;
    o.tol = 1e-13;
    const auto m = fit_bicm({{2, 1, 1}, {2, 1, 1}}, o);
    const auto [a, b] = symmetric_oracle();
    auto p = [](double x, double y) { return x * y / (1 + x * y); };
    CHECK(m.probability(0, 0) == doctest::Approx(p(a, a)).epsilon(1e-10));
    CHECK(m.probability(0, 1) == doctest::Approx(p(a, b)).epsilon(1e-10));
    CHECK(m.probability(1, 0) == doctest::Approx(p(b, a)).epsilon(1e-10));
    CHECK(m.probability(2, 2) == doctest::Approx(p(b, b)).epsilon(1e-10));
}

TEST_CASE("grouped and ungrouped solves agree") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto g = support::random_bipartite(30, 45, 0.15, seed);
        BicmOptions grouped, plain;
        grouped.tol = plain.tol = 1e-13;
        plain.group_degrees = false;
        const auto a = fit_bicm(degrees_of(g), grouped);
        const auto b = fit_bicm(degrees_of(g), plain);
        CHECK(a.solver().grouped);
        CHECK_FALSE(b.solver().grouped);
        CHECK(a.solver().unknowns < b.solver().unknowns);
        double worst = 0.0;
        for (NodeIndex i = 0; i < a.top_count(); ++i) {
            for (NodeIndex x = 0; x < a.bottom_count(); ++x) {
                worst = std::max(worst, std::abs(a.probability(i, x) - b.probability(i, x)));
            }
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("fit reaches tolerance on random graphs, with residual as the likelihood gradient") {
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        const double density = 0.02 + 0.08 * static_cast<double>(seed - 10);
        const auto g = support::random_bipartite(40 + seed, 60, density, seed);
        const auto ds = degrees_of(g);
        const auto m = fit_bicm(ds);
        CHECK(m.fit_residual() <= 1e-8);
        CHECK(degree_residual(m, ds) == doctest::Approx(m.fit_residual()));
        const auto et = m.expected_top_degrees();
        for (std::size_t i = 0; i < et.size(); ++i) {
            CHECK(std::abs(et[i] - static_cast<double>(ds.top[i])) / std::max<double>(1.0, ds.top[i]) <= 1e-8);
        }
    }
}

TEST_CASE("degenerate nodes are frozen") {
    // top 0 has no links, top 1 links everything
    const DegreeSequence ds{{0, 3, 1}, {2, 1, 1}};
    const auto m = fit_bicm(ds);
    for (NodeIndex a = 0; a < 3; ++a) {
        CHECK(m.probability(0, a) == 0.0);
        CHECK(m.probability(1, a) == 1.0);
    }
    CHECK(m.top_multipliers()[0] == 0.0);
    CHECK(std::isinf(m.top_multipliers()[1]));
    CHECK(max_abs_diff(m.expected_bottom_degrees(), ds.bottom) <= 1e-8);
}

TEST_CASE("boundary degree sequences are forced whole") {
    // Only one graph realizes these degrees: a staircase.
    const DegreeSequence ds{{3, 2, 1}, {3, 2, 1}};
    const auto m = fit_bicm(ds);
    for (NodeIndex i = 0; i < 3; ++i) {
        for (NodeIndex a = 0; a < 3; ++a) {
            const double expected = (i + a <= 2) ? 1.0 : 0.0;
            CHECK(m.probability(i, a) == expected);
        }
    }
}

TEST_CASE("invalid degree sequences") {
    CHECK_THROWS_AS(fit_bicm({{3}, {1, 1}}), InputError);         // unequal sums
    CHECK_THROWS_AS(fit_bicm({{3, 1}, {2, 2}}), InputError);      // degree above the other layer
    CHECK_THROWS_AS(fit_bicm({{2, 2, 0}, {3, 1, 0}}), InputError);  // not graphical
    BicmOptions o;
    o.tol = 0.0;
    CHECK_THROWS_AS(fit_bicm({{1}, {1}}, o), InputError);
}

TEST_CASE("exhausted iteration budget reports the trajectory") {
    const auto g = support::random_bipartite(50, 80, 0.1, 99);
    BicmOptions o;
    o.max_iter = 1;
    o.tol = 1e-14;
    try {
        fit_bicm(degrees_of(g), o);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK_FALSE(e.trajectory().empty());
    }
}

TEST_CASE("edge probability accessor") {
    const auto m = BicmModel::from_multipliers({0.5, 2.0}, {1.0, 3.0});
    CHECK(edge_probability(m, 0, 0) == doctest::Approx(0.5 / 1.5));
    CHECK_THROWS_AS(edge_probability(m, 2, 0), std::out_of_range);
    CHECK_THROWS_AS(edge_probability(m, 0, 2), std::out_of_range);
    // nondecreasing in both multipliers
    CHECK(m.probability(1, 0) >= m.probability(0, 0));
    CHECK(m.probability(0, 1) >= m.probability(0, 0));
    CHECK(m.probability(1, 1) >= m.probability(1, 0));
}

TEST_CASE("sampling") {
    SUBCASE("all-zero model gives empty graphs") {
        const auto m = fit_bicm({{0, 0}, {0, 0, 0}});
        for (std::uint64_t s = 0; s < 5; ++s) CHECK(sample_graph(m, s).edge_count() == 0);
    }
    SUBCASE("all-frozen-one model gives complete graphs") {
        const auto m = fit_bicm({{3, 3}, {2, 2, 2}});
        for (std::uint64_t s = 0; s < 5; ++s) CHECK(sample_graph(m, s).edge_count() == 6);
    }
    SUBCASE("fixed seed gives the same graph") {
        const auto m = fit_bicm(degrees_of(support::random_bipartite(20, 20, 0.3, 4)));
        CHECK(sample_graph(m, 42) == sample_graph(m, 42));
    }
    SUBCASE("symmetric two by two frequencies") {
        const auto m = fit_bicm({{1, 1}, {1, 1}});
        std::array<int, 4> hits{};
        const int samples = 20000;
        for (int s = 0; s < samples; ++s) {
            const auto g = sample_graph(m, static_cast<std::uint64_t>(s));
            for (const auto& e : g.edges()) ++hits[e.top * 2 + e.bottom];
        }
        for (int h : hits) {
            const double f = static_cast<double>(h) / samples;
            CHECK(f >= 0.49);
            CHECK(f <= 0.51);
        }
    }
}

TEST_CASE("log likelihood") {
    SUBCASE("empty graph under the all-zero model") {
        const auto m = fit_bicm({{0, 0}, {0, 0}});
        const BipartiteGraph g({"a", "b"}, {"x", "y"}, {});
        CHECK(log_likelihood(m, g) == 0.0);
    }
    SUBCASE("two edges under the symmetric model") {
        const auto m = fit_bicm({{1, 1}, {1, 1}});
        const BipartiteGraph g({"a", "b"}, {"x", "y"}, {{0, 0}, {1, 1}});
        CHECK(log_likelihood(m, g) == doctest::Approx(4 * std::log(0.5)).epsilon(1e-8));
    }
    SUBCASE("contradicting a frozen pair") {
        const auto m = fit_bicm({{2, 0}, {1, 1}});
        const BipartiteGraph g({"a", "b"}, {"x", "y"}, {{1, 0}});
        CHECK(std::isinf(log_likelihood(m, g)));
        CHECK(log_likelihood(m, g) < 0);
    }
    SUBCASE("dimension mismatch") {
        const auto m = fit_bicm({{1, 1}, {1, 1}});
        const BipartiteGraph g({"a"}, {"x", "y"}, {{0, 0}});
        CHECK_THROWS_AS(log_likelihood(m, g), InputError);
    }
    SUBCASE("fitted multipliers beat a perturbation grid") {
        const auto g = support::random_bipartite(12, 15, 0.3, 8);
        const auto ds = degrees_of(g);
        const auto m = fit_bicm(ds, {1e-12, 10000, false});
        const double best = log_likelihood(m, g);
        REQUIRE(std::isfinite(best));
        for (double eps : {-0.2, -0.05, -0.01, 0.01, 0.05, 0.2}) {
            for (std::size_t i = 0; i < m.top_count(); ++i) {
                if (m.top_blocks()[i] < 0) continue;
                auto top = m.top_multipliers();
                top[i] *= std::exp(eps);
                const BicmModel moved(top, m.bottom_multipliers(), m.top_blocks(), m.bottom_blocks(),
                                      m.frozen_ones());
                CHECK(log_likelihood(moved, g) <= best + 1e-9);
            }
            for (std::size_t a = 0; a < m.bottom_count(); ++a) {
                if (m.bottom_blocks()[a] < 0) continue;
                auto bottom = m.bottom_multipliers();
                bottom[a] *= std::exp(eps);
                const BicmModel moved(m.top_multipliers(), bottom, m.top_blocks(), m.bottom_blocks(),
                                      m.frozen_ones());
                CHECK(log_likelihood(moved, g) <= best + 1e-9);
            }
        }
    }
}
