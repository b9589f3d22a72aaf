#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "parfix/operators.hpp"
#include "test_support.hpp"

using namespace parfix;
using parfix::testing::Gen;

TEST_CASE("property classes follow the construction rules", "[operators]") {
    const auto P = metric_projection(ConvexSet::ball(Vector{0, 0}, 1));
    CHECK(P.property_class() == PropertyClass::FirmlyNonexpansive);

    const auto sub = subgradient_projection(ConvexFunctional::max_affine({{Vector{1, 0}, 1}}));
    CHECK(sub.property_class() == PropertyClass::StronglyQuasinonexpansive);

    const auto A = affine(Matrix::from_rows({{0, -1}, {1, 0}}), Vector{0, 0});
    CHECK(A.property_class() == PropertyClass::Nonexpansive);
    CHECK(relax(A, 0.5).property_class() == PropertyClass::StronglyQuasinonexpansive);
    CHECK(relax(sub, 0.5).property_class() == PropertyClass::StronglyQuasinonexpansive);
    CHECK(relax(P, 0.5).property_class() == PropertyClass::FirmlyNonexpansive);

    const auto C = ConvexSet::box(Vector{-2, -2}, Vector{2, 2});
    CHECK(compose_with_projection(sub, C).property_class() ==
          PropertyClass::StronglyQuasinonexpansive);
    CHECK(compose_with_projection(P, C).property_class() ==
          PropertyClass::StronglyQuasinonexpansive);
    CHECK(compose_with_projection(A, C).property_class() == PropertyClass::Nonexpansive);

    for (const auto& op : {P, sub, A}) CHECK(op.demiclosed_at_zero());
    const auto opaque = custom([](const Vector& x) { return x; }, 2,
                               PropertyClass::Quasinonexpansive, false, "identity");
    CHECK_FALSE(opaque.demiclosed_at_zero());
    CHECK_FALSE(relax(opaque, 0.5).demiclosed_at_zero());
}

TEST_CASE("class implication lattice", "[operators]") {
    using PC = PropertyClass;
    CHECK(implies(PC::FirmlyNonexpansive, PC::StronglyQuasinonexpansive));
    CHECK(implies(PC::FirmlyNonexpansive, PC::Nonexpansive));
    CHECK(implies(PC::Nonexpansive, PC::Quasinonexpansive));
    CHECK_FALSE(implies(PC::Nonexpansive, PC::StronglyQuasinonexpansive));
    CHECK_FALSE(implies(PC::StronglyQuasinonexpansive, PC::Nonexpansive));
    CHECK_FALSE(implies(PC::Quasinonexpansive, PC::StronglyQuasinonexpansive));
}

TEST_CASE("construction errors", "[operators]") {
    const auto P = metric_projection(ConvexSet::ball(Vector{0, 0}, 1));
    CHECK_THROWS_AS(relax(P, 0.0), config_error);
    CHECK_THROWS_AS(relax(P, 1.0), config_error);
    CHECK_THROWS_AS(affine(Matrix::from_rows({{2, 0}, {0, 1}}), Vector{0, 0}), config_error);
    CHECK_THROWS_AS(metric_projection(ConvexSet::intersection({ConvexSet::ball(Vector{0}, 1)})),
                    config_error);
    CHECK_THROWS_AS(ConvexFunctional::quadratic(Matrix::from_rows({{1, 0}, {0, -1}}), Vector{0, 0}, 0),
                    config_error);
    CHECK_THROWS_AS(ConvexFunctional::quadratic(Matrix::from_rows({{1, 1}, {0, 1}}), Vector{0, 0}, 0),
                    config_error);
}

TEST_CASE("apply: relaxation keeps fixed points", "[operators]") {
    Gen gen(31);
    for (int i = 0; i < 100; ++i) {
        const auto D = gen.ball(3);
        const auto P = metric_projection(D);
        const double lambda = gen.uniform(0.01, 0.99);
        const Vector z = project(D, gen.vec(3));
        const Vector got = apply(relax(P, lambda), z);
        CHECK(distance(got, z) <= fixed_point_tolerance * (1 + norm(z)));
    }
}

TEST_CASE("apply: subgradient projection", "[operators]") {
    // f(x) = max(x0 - 1, x1 - 2)
    const auto f = ConvexFunctional::max_affine({{Vector{1, 0}, 1}, {Vector{0, 1}, 2}});
    const auto S = subgradient_projection(f);
    CHECK(apply(S, Vector{0, 0}) == Vector{0, 0});
    CHECK(apply(S, Vector{1, 2}) == Vector{1, 2});
    // f = 3 via piece 0, g = (1, 0)
    CHECK(apply(S, Vector{4, 0}) == Vector{1, 0});
    // exact tie between pieces: lowest index wins
    CHECK(apply(S, Vector{3, 4}) == Vector{1, 4});

    SECTION("Polyak step for a quadratic") {
        // f(x) = 0.5 ||x||^2 - 0.5: unit ball as zero sublevel set
        const auto q = ConvexFunctional::quadratic(Matrix::identity(2), Vector{0, 0}, -0.5);
        const Vector x{3, 4};
        const double fx = 0.5 * 25 - 0.5;
        const Vector expected = axpby(1.0, x, -fx / 25.0, x);
        CHECK(max_abs_diff(apply(subgradient_projection(q), x), expected) <= 1e-15);
    }

    SECTION("zero subgradient with f > 0 is an inconsistent functional") {
        const auto q = ConvexFunctional::quadratic(Matrix::identity(2), Vector{0, 0}, 1.0);
        CHECK_THROWS_AS(apply(subgradient_projection(q), Vector{0, 0}), domain_error);
    }
}

TEST_CASE("apply: box projection is a coordinate clamp", "[operators]") {
    Gen gen(32);
    for (int i = 0; i < 100; ++i) {
        const auto box = gen.box(5);
        const auto& b = *box.get_if<Box>();
        const Vector x = gen.vec(5);
        const Vector y = apply(metric_projection(box), x);
        for (std::size_t k = 0; k < 5; ++k) {
            // per coordinate, y_k minimises |x_k - t| over [lo_k, hi_k]
            const double candidates[] = {b.lo[k], b.hi[k], x[k]};
            double best = std::numeric_limits<double>::infinity();
            for (double t : candidates) {
                if (t >= b.lo[k] && t <= b.hi[k]) best = std::min(best, std::abs(x[k] - t));
            }
            CHECK(std::abs(x[k] - y[k]) == best);
        }
    }
}

TEST_CASE("apply: composition with a projection", "[operators]") {
    const auto C = ConvexSet::box(Vector{-1, -1}, Vector{1, 1});
    const auto S = metric_projection(ConvexSet::halfspace(Vector{1, 1}, 0)).restricted_to(C);
    CHECK_THROWS_AS(apply(S, Vector{5, 5}), domain_error);
    const auto SC = compose_with_projection(S, C);
    CHECK(SC.is_self_map());
    // P_C(5,5) = (1,1), then halfspace projection gives (0,0)
    CHECK(max_abs_diff(apply(SC, Vector{5, 5}), Vector{0, 0}) <= 1e-15);

    SECTION("fixed points of S inside C stay fixed") {
        Gen gen(33);
        for (int i = 0; i < 100; ++i) {
            Vector z = project(C, gen.vec(2));
            z = apply(S, z);  // in the halfspace, still in C
            if (!contains(C, z, 0.0)) continue;
            CHECK(distance(apply(SC, z), z) <= fixed_point_tolerance);
        }
    }
}

TEST_CASE("displacement", "[operators]") {
    const auto P = metric_projection(ConvexSet::ball(Vector{0, 0}, 1));
    CHECK(displacement(P, Vector{0.3, 0.2}) == 0.0);
    CHECK(displacement(P, Vector{2, 0}) == 1.0);

    Gen gen(34);
    for (int i = 0; i < 100; ++i) {
        const auto T = metric_projection(gen.halfspace(3));
        const double lambda = gen.uniform(0.05, 0.95);
        const Vector x = gen.vec(3);
        CHECK(displacement(relax(T, lambda), x) ==
              Catch::Approx((1 - lambda) * displacement(T, x)).margin(1e-12));
    }
}

TEST_CASE("fixed point residual", "[operators]") {
    CHECK_THROWS_AS(fixed_point_residual({}, Vector{1}), config_error);
    Gen gen(35);
    for (int i = 0; i < 50; ++i) {
        std::vector<Operator> ops{metric_projection(gen.ball(3)),
                                  relax(metric_projection(gen.halfspace(3)), 0.5),
                                  metric_projection(gen.box(3))};
        const Vector x = gen.vec(3);
        double expected = 0;
        for (const auto& op : ops) expected = std::max(expected, distance(apply(op, x), x));
        CHECK(fixed_point_residual(ops, x) == expected);
        CHECK(fixed_point_residual(std::span(ops).first(1), x) == displacement(ops[0], x));
    }
    // common fixed point
    std::vector<Operator> ops{metric_projection(ConvexSet::ball(Vector{0, 0}, 1)),
                              metric_projection(ConvexSet::halfspace(Vector{1, 0}, 0.5))};
    CHECK(fixed_point_residual(ops, Vector{0, 0.1}) == 0.0);
}

TEST_CASE("quasinonexpansiveness with a known fixed point", "[operators][property]") {
    Gen gen(36);
    // Every operator below fixes the origin.
    const double c = std::cos(0.7), s = std::sin(0.7);
    const auto rot = affine(Matrix::from_rows({{c, -s, 0}, {s, c, 0}, {0, 0, 1}}), Vector{0, 0, 0});
    const auto ball = metric_projection(ConvexSet::ball(Vector{0.2, 0, 0}, 1));
    const auto half = metric_projection(ConvexSet::halfspace(Vector{1, 2, 3}, 0.5));
    const auto sub = subgradient_projection(
        ConvexFunctional::max_affine({{Vector{1, 0, 0}, 0.1}, {Vector{0, 1, -1}, 0}}));
    const auto quad = subgradient_projection(ConvexFunctional::quadratic(
        Matrix::from_rows({{2, 0, 0}, {0, 1, 0}, {0, 0, 0.5}}), Vector{0, 0, 0}, -1));
    const auto C = ConvexSet::box(Vector{-1, -1, -1}, Vector{1, 1, 1});
    const std::vector<Operator> ops{rot,           ball,
                                    half,          sub,
                                    quad,          relax(rot, 0.3),
                                    relax(sub, 0.6), compose_with_projection(quad, C)};
    const Vector z{0, 0, 0};
    for (const auto& op : ops) {
        REQUIRE(distance(apply(op, z), z) <= fixed_point_tolerance);
        for (int i = 0; i < 1000; ++i) {
            const Vector x = gen.vec(3);
            CHECK(distance(apply(op, x), z) <= distance(x, z) + 1e-9);
        }
    }
}

TEST_CASE("strong quasinonexpansiveness diagnostic", "[operators][property]") {
    // Along sequences where ||x_n - p|| - ||T x_n - p|| -> 0, the displacement
    // must vanish too. For averaged maps the quantitative form is
    //   ||x - Tx||^2 <= c (||x - p|| - ||Tx - p||)(||x - p|| + ||Tx - p||).
    Gen gen(37);
    const auto D = ConvexSet::ball(Vector{0, 0, 0}, 1);
    const Vector p{0.1, 0.2, -0.3};
    const std::vector<std::pair<Operator, double>> ops{
        {metric_projection(D), 1.0},
        {relax(metric_projection(D), 0.25), 0.75 / 0.25},
        {relax(affine(Matrix::from_rows({{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}), Vector{0, 0, 0}), 0.5),
         1.0},
    };
    for (const auto& [T, c] : ops) {
        const Vector fixed = T.get_if<Relaxed>() && T.get_if<Relaxed>()->inner->get_if<Affine>()
                                 ? Vector{0, 0, 0.4}
                                 : p;
        for (int i = 0; i < 500; ++i) {
            const Vector x = gen.vec(3);
            const Vector tx = apply(T, x);
            const double a = distance(x, fixed), b = distance(tx, fixed);
            CHECK(norm_squared(x - tx) <= c * (a - b) * (a + b) + 1e-9);
        }
        // Constructed sequence approaching the fixed set: gap and displacement both vanish.
        double last_disp = 1e300;
        for (int n = 1; n <= 6; ++n) {
            const Vector x = axpby(1.0, fixed, std::pow(10.0, -n), Vector{3, -2, 1});
            const double disp = displacement(T, x);
            CHECK(disp <= last_disp);
            last_disp = disp;
        }
        CHECK(last_disp <= 1e-5);
    }
}
