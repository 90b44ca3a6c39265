#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qvi/errors.hpp"
#include "qvi/grid.hpp"

using namespace qvi;

TEST_SUITE("grid") {

TEST_CASE("spacing, indexing and boundary mask") {
    Grid g({{0.0, 1.0}, {-1.0, 3.0}}, {5, 9});
    CHECK(g.dim() == 2);
    CHECK(g.size() == 45);
    CHECK(g.spacing(0) == doctest::Approx(0.25));
    CHECK(g.spacing(1) == doctest::Approx(0.5));
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(g.linear(g.multi(k)) == k);
    // last axis fastest
    CHECK(g.linear({0, 1, 0}) == 1);
    CHECK(g.linear({1, 0, 0}) == 9);
    CHECK(g.on_boundary(MultiIndex{0, 3, 0}));
    CHECK(g.on_boundary(MultiIndex{2, 8, 0}));
    CHECK_FALSE(g.on_boundary(MultiIndex{2, 3, 0}));
    CHECK(g.point(MultiIndex{4, 8, 0})[0] == 1.0);
    CHECK(g.point(MultiIndex{4, 8, 0})[1] == 3.0);
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(Grid({{0.0, 1.0}}, {2}), Error);
    CHECK_THROWS_AS(Grid({{1.0, 1.0}}, {5}), Error);
    CHECK_THROWS_AS(Grid({{0.0, 1.0}}, {5, 5}), Error);
    Grid g({{0.0, 1.0}}, {5});
    CHECK_THROWS_AS(GridField(g, std::vector<double>(4, 0.0)), ShapeError);
    std::vector<double> v(5, 0.0);
    v[2] = NAN;
    CHECK_THROWS_AS(GridField(g, v), Error);
}

TEST_CASE("coarsening keeps every other node") {
    Grid g = testutil::unit_grid({129, 65});
    Grid c = g.coarsened();
    CHECK(c.count(0) == 65);
    CHECK(c.count(1) == 33);
    CHECK(c.spacing(0) == doctest::Approx(2 * g.spacing(0)));
}

TEST_CASE("second difference annihilates affine functions and is exact on quadratics") {
    Grid g({{0.0, 2.0}, {0.0, 1.0}}, {17, 9});
    const GridField affine = testutil::sample(g, [](const Point& p) { return 3.0 * p[0] - 2.0 * p[1] + 1.0; });
    const GridField sq = testutil::sample(g, [](const Point& p) { return p[0] * p[0] + p[1] * p[1]; });
    // q = x^T A x + b.x with A = [[1, 0.5], [0.5, -2]]
    const GridField q = testutil::sample(g, [](const Point& p) {
        return p[0] * p[0] + p[0] * p[1] - 2.0 * p[1] * p[1] + 0.3 * p[0];
    });
    const Offset hs[] = {{1, 0, 0}, {0, 1, 0}, {2, -1, 0}, {3, 2, 0}};
    for (const Offset& h : hs) {
        const Point d = g.displacement(h);
        const double len2 = d[0] * d[0] + d[1] * d[1];
        const double expect = 2.0 * (d[0] * d[0] + d[0] * d[1] - 2.0 * d[1] * d[1]) / len2;
        const MultiIndex x{8, 4, 0};
        CHECK(std::abs(second_difference(affine, x, h)) < 1e-12);
        CHECK(second_difference(sq, x, h) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(second_difference(q, x, h) == doctest::Approx(expect).epsilon(1e-11));
    }
    CHECK_THROWS_AS(second_difference(sq, {0, 4, 0}, {1, 0, 0}), RangeError);
}

TEST_CASE("second difference is even in h") {
    std::mt19937_64 rng(1);
    Grid g = testutil::unit_grid({9, 9});
    const GridField u = testutil::random_field(g, rng);
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
            if (a == 0 && b == 0) continue;
            CHECK(second_difference(u, {4, 4, 0}, {a, b, 0}) == second_difference(u, {4, 4, 0}, {-a, -b, 0}));
        }
}

TEST_CASE("discrete laplacian equals the sum of axis second differences") {
    std::mt19937_64 rng(2);
    Grid g({{0.0, 1.0}, {0.0, 2.0}, {0.0, 1.0}}, {5, 7, 6});
    const GridField u = testutil::random_field(g, rng);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.on_boundary(k)) continue;
        const MultiIndex x = g.multi(k);
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) {
            Offset e{0, 0, 0};
            e[i] = 1;
            sum += second_difference(u, x, e);
        }
        CHECK(discrete_laplacian(u, x) == sum);
    }
    const GridField x1sq = testutil::sample(g, [](const Point& p) { return p[0] * p[0]; });
    CHECK(discrete_laplacian(x1sq, {2, 3, 2}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(discrete_laplacian(u, {0, 3, 2}), RangeError);
}

TEST_CASE("sup norm and sup distance") {
    std::mt19937_64 rng(3);
    Grid g = testutil::unit_grid({7, 7});
    CHECK(sup_norm(GridField::constant(g, 0.0)) == 0.0);
    std::vector<double> v(g.size(), 0.0);
    v[10] = 5.0;
    CHECK(sup_norm(GridField(g, v)) == 5.0);
    for (int t = 0; t < 20; ++t) {
        const GridField a = testutil::random_field(g, rng);
        const GridField b = testutil::random_field(g, rng);
        const GridField c = testutil::random_field(g, rng);
        CHECK(sup_dist(a, a) == 0.0);
        CHECK(sup_dist(a, b) == sup_dist(b, a));
        CHECK(sup_dist(a, c) <= sup_dist(a, b) + sup_dist(b, c));
    }
    CHECK_THROWS_AS(sup_dist(GridField::constant(g, 0.0), GridField::constant(testutil::unit_grid({7, 5}), 0.0)),
                    ShapeError);
}

}
