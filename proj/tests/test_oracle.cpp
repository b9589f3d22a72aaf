#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "parfix/oracle.hpp"
#include "test_support.hpp"

using namespace parfix;
using parfix::testing::Gen;

namespace {

// Nearest point of {<a,y> <= b} ∩ Ball(c, r) in R^2 by enumeration: the
// answer is x itself, the ball projection, the halfspace projection, or one of
// the two points where the line meets the circle; the closest feasible
// candidate wins. A dense scan of the feasible arc confirms nothing on the
// boundary is closer.
Vector brute_force_halfspace_ball_2d(const Vector& a, double b, const Vector& c, double r,
                                     const Vector& x) {
    const auto H = ConvexSet::halfspace(a, b);
    const auto B = ConvexSet::ball(c, r);
    std::vector<Vector> candidates{x, project(B, x), project(H, x)};
    const double an = norm(a);
    const double dist_line = (b - inner(a, c)) / an;
    if (std::abs(dist_line) <= r) {
        const Vector foot = axpby(1.0, c, dist_line / an, a);
        const double half = std::sqrt(r * r - dist_line * dist_line);
        const Vector dir{-a[1] / an, a[0] / an};
        candidates.push_back(axpby(1.0, foot, half, dir));
        candidates.push_back(axpby(1.0, foot, -half, dir));
    }
    Vector out;
    double out_d = std::numeric_limits<double>::infinity();
    for (const auto& y : candidates) {
        if (inner(a, y) - b > 1e-12 || distance(y, c) - r > 1e-12) continue;
        if (const double d = distance(y, x); d < out_d) {
            out_d = d;
            out = y;
        }
    }

    const int steps = 100000;
    for (int i = 0; i < steps; ++i) {
        const double t = 2 * std::numbers::pi * i / steps;
        const Vector y = axpby(1.0, c, r, Vector{std::cos(t), std::sin(t)});
        if (inner(a, y) > b) continue;
        REQUIRE(distance(y, x) >= out_d - 1e-12);
    }
    return out;
}

} // namespace

TEST_CASE("dykstra: single set equals its projection", "[oracle]") {
    Gen gen(61);
    for (int i = 0; i < 50; ++i) {
        const ConvexSet sets[] = {gen.ball(3), gen.box(3), gen.halfspace(3)};
        for (const auto& s : sets) {
            const Vector x = gen.vec(3);
            const std::vector<ConvexSet> one{s};
            CHECK(max_abs_diff(oracle::project_intersection(one, x), project(s, x)) <= 1e-12);
        }
    }
}

TEST_CASE("dykstra: closed forms", "[oracle]") {
    SECTION("orthogonal halfspaces") {
        const std::vector<ConvexSet> sets{ConvexSet::halfspace(Vector{-1, 0}, 0),
                                          ConvexSet::halfspace(Vector{0, -1}, 0)};
        CHECK(max_abs_diff(oracle::project_intersection(sets, Vector{-1, -2}), Vector{0, 0}) <= 1e-12);
    }
    SECTION("two halfspaces meeting at a corner") {
        // x + y <= 0 and x - y <= 0; the nearest point of (3, 1) is the apex (0, 0).
        const std::vector<ConvexSet> sets{ConvexSet::halfspace(Vector{1, 1}, 0),
                                          ConvexSet::halfspace(Vector{1, -1}, 0)};
        CHECK(max_abs_diff(oracle::project_intersection(sets, Vector{3, 1}), Vector{0, 0}) <= 1e-10);
        // (1, 3) only violates the first; its projection (-1, 1) satisfies the second.
        CHECK(max_abs_diff(oracle::project_intersection(sets, Vector{1, 3}), Vector{-1, 1}) <= 1e-10);
    }
    SECTION("halfspace and hyperplane") {
        // z = 1 and x <= 0 in R^3
        const std::vector<ConvexSet> sets{ConvexSet::hyperplane(Vector{0, 0, 1}, 1),
                                          ConvexSet::halfspace(Vector{1, 0, 0}, 0)};
        CHECK(max_abs_diff(oracle::project_intersection(sets, Vector{2, 5, -3}), Vector{0, 5, 1}) <=
              1e-10);
    }
    SECTION("nested intersections flatten") {
        const auto inner_set = ConvexSet::intersection(
            {ConvexSet::halfspace(Vector{-1, 0}, 0), ConvexSet::halfspace(Vector{0, -1}, 0)});
        const std::vector<ConvexSet> sets{inner_set, ConvexSet::ball(Vector{0, 0}, 1)};
        const Vector p = oracle::project_intersection(sets, Vector{3, 4});
        CHECK(max_abs_diff(p, Vector{0.6, 0.8}) <= 1e-10);
    }
}

TEST_CASE("dykstra: halfspace and ball against brute force", "[oracle]") {
    Gen gen(62);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        const Vector c = gen.vec(2, 1.0);
        const double r = gen.uniform(0.5, 2.0);
        const Vector a = gen.nonzero(2);
        // Line through the ball so the intersection is nonempty.
        const double b = inner(a, c) + gen.uniform(-0.8, 0.8) * r * norm(a);
        const Vector x = gen.vec(2);
        const std::vector<ConvexSet> sets{ConvexSet::halfspace(a, b), ConvexSet::ball(c, r)};
        const Vector got = oracle::project_intersection(sets, x);
        const Vector expected = brute_force_halfspace_ball_2d(a, b, c, r, x);
        CHECK(distance(got, expected) <= 1e-8);
        ++checked;
    }
    CHECK(checked == 40);
}

TEST_CASE("membership", "[oracle]") {
    const std::vector<ConvexSet> sets{ConvexSet::ball(Vector{0, 0}, 1),
                                      ConvexSet::halfspace(Vector{1, 0}, 0)};
    CHECK(oracle::membership(sets, Vector{-0.5, 0.5}, 1e-6));
    CHECK(oracle::membership(sets, Vector{1e-8, 0}, 1e-6));
    CHECK_FALSE(oracle::membership(sets, Vector{0.5, 0}, 1e-6));
    CHECK_FALSE(oracle::membership(sets, Vector{-2, 0}, 1e-6));
}

TEST_CASE("projection onto F is firmly nonexpansive", "[oracle][property]") {
    Gen gen(63);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector z0 = gen.vec(3, 1.0);
        std::vector<ConvexSet> sets{ConvexSet::ball(z0, gen.uniform(0.5, 2))};
        for (int k = 0; k < 2; ++k) {
            const Vector a = gen.nonzero(3);
            sets.push_back(ConvexSet::halfspace(a, inner(a, z0) + gen.uniform(-0.2, 0.5)));
        }
        for (int i = 0; i < 20; ++i) {
            const Vector x = gen.vec(3), y = gen.vec(3);
            const Vector px = oracle::project_intersection(sets, x);
            const Vector py = oracle::project_intersection(sets, y);
            CHECK(testing::firm_defect(x, y, px, py) <= 1e-6);
            CHECK(oracle::membership(sets, px, 1e-8));
        }
    }
}

TEST_CASE("empty intersections are reported", "[oracle]") {
    const std::vector<ConvexSet> sets{ConvexSet::hyperplane(Vector{0, 1}, 0),
                                      ConvexSet::hyperplane(Vector{0, 1}, 1)};
    CHECK_THROWS_AS(oracle::project_intersection(sets, Vector{0, 5}, {.tol = 1e-12, .max_sweeps = 2000}),
                    oracle_error);
}

TEST_CASE("fixed point sets of operators", "[oracle]") {
    const auto H = ConvexSet::halfspace(Vector{1, 0}, 1);
    const auto C = ConvexSet::box(Vector{-2, -2}, Vector{2, 2});
    CHECK(oracle::fixed_point_sets(metric_projection(H)) == std::vector<ConvexSet>{H});
    CHECK(oracle::fixed_point_sets(relax(metric_projection(H), 0.3)) == std::vector<ConvexSet>{H});
    CHECK(oracle::fixed_point_sets(compose_with_projection(metric_projection(H), C)) ==
          std::vector<ConvexSet>{H, C});
    const auto f = ConvexFunctional::max_affine({{Vector{1, 0}, 1}, {Vector{0, 1}, 2}});
    CHECK(oracle::fixed_point_sets(subgradient_projection(f)) ==
          std::vector<ConvexSet>{ConvexSet::halfspace(Vector{1, 0}, 1),
                                 ConvexSet::halfspace(Vector{0, 1}, 2)});
    CHECK_FALSE(oracle::fixed_point_sets(affine(Matrix::identity(2), Vector{0, 0})).has_value());
    CHECK_FALSE(oracle::fixed_point_sets(subgradient_projection(ConvexFunctional::quadratic(
                                             Matrix::identity(2), Vector{0, 0}, -1)))
                    .has_value());
    const std::vector<Operator> ops{metric_projection(H), relax(metric_projection(C), 0.5)};
    CHECK(oracle::family_fixed_point_sets(ops, ConvexSet::ball(Vector{0, 0}, 9))->size() == 3);

    // Fixed points of the operators are members of the described set.
    Gen gen(64);
    const auto sub = subgradient_projection(f);
    const auto sets = *oracle::fixed_point_sets(sub);
    for (int i = 0; i < 200; ++i) {
        const Vector x = gen.vec(2);
        CHECK((displacement(sub, x) == 0.0) == oracle::membership(sets, x, 0.0));
    }
}
