#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "goldstein/errors.hpp"
#include "goldstein/prandtl_ops.hpp"
#include "goldstein/profile.hpp"
#include "goldstein/rational_poly.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace goldstein;

namespace {

double max_abs_diff(const Field& a, const Field& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

struct Uapp {
    double s = 1e4, b = 1e-4;  // χ ≡ 1 on [0, 10]
    ApproxProfileParams p = ApproxProfileParams::from_algebra();
    ProfileValue operator()(double Y) const { return eval_uapp_full(s, b, Y, p); }
};

GridPtr ygrid(std::size_t n) { return Grid::tanh_clustered(10.0, n, 2.5); }

// Convergence order from three refinements of a scalar error functional.
std::pair<double, double> orders(const std::function<double(std::size_t)>& err) {
    const double e0 = err(100), e1 = err(200), e2 = err(400);
    return {std::log2(e0 / e1), std::log2(e1 / e2)};
}

}  // namespace

TEST_CASE("op_L basics") {
    auto g = ygrid(200);
    const Field U = Field::sample(g, [](double Y) { return Y + 0.5 * Y * Y; });
    const OperatorContext ctx(U);
    const Field Y = Field::sample(g, [](double y) { return y; });
    const auto poly = apply_L(RationalPoly::Y() + Rational(1, 2) * RationalPoly::Y(2), RationalPoly::Y());
    const Field expected = Field::sample(g, [&](double y) { return poly.evaluate(y, 0.0); });
    CHECK(max_abs_diff(op_L(ctx, Y), expected) < 1e-10);
    const Field k = op_L(ctx, ctx.UY());
    CHECK(max_abs_diff(k, Field(g, 0.0)) < 1e-10);
    const Field LU = op_L(ctx, U);
    CHECK(max_abs_diff(LU, U * U - ctx.UY() * cumint(U)) == 0.0);
}

TEST_CASE("kernel of L_U at second order on a curved profile") {
    Uapp u;
    auto err = [&](std::size_t n) {
        auto g = ygrid(n);
        const Field U = Field::sample(g, [&](double Y) { return u(Y).u; });
        const OperatorContext ctx(U);
        const Field UY = Field::sample(g, [&](double Y) { return u(Y).uy; });
        return max_abs_diff(op_L(ctx, UY), Field(g, 0.0));
    };
    const auto [p1, p2] = orders(err);
    CHECK(p1 >= 1.8);
    CHECK(p2 >= 1.8);
}

TEST_CASE("explicit inverses converge at second order") {
    Uapp u;
    auto inv_sq = [&](std::size_t n) {
        auto g = ygrid(n);
        const Field U = Field::sample(g, [&](double Y) { return u(Y).u; });
        const OperatorContext ctx(U);
        const Field rhs = Field::sample(g, [&](double Y) { return u(Y).u + Y * u(Y).uy; });
        return max_abs_diff(op_Linv(ctx, U * U), rhs);
    };
    auto inv_flux = [&](std::size_t n) {
        auto g = ygrid(n);
        const Field U = Field::sample(g, [&](double Y) { return u(Y).u; });
        const OperatorContext ctx(U);
        const Field rhs = Field::sample(g, [&](double Y) { return Y * u(Y).uy; });
        return max_abs_diff(op_Linv(ctx, ctx.UY() * cumint(U)), rhs);
    };
    auto pair = [&](std::size_t n) {
        auto g = ygrid(n);
        const Field U = Field::sample(g, [&](double Y) { return u(Y).u; });
        const OperatorContext ctx(U);
        const Field w = Field::sample(g, [](double Y) { return std::sin(Y) * std::exp(-0.2 * Y); });
        return max_abs_diff(op_Linv(ctx, op_L(ctx, w)), w);
    };
    for (const auto& f : {std::function<double(std::size_t)>(inv_sq), std::function<double(std::size_t)>(inv_flux),
                          std::function<double(std::size_t)>(pair)}) {
        const auto [p1, p2] = orders(f);
        CHECK(p1 >= 1.8);
        CHECK(p2 >= 1.8);
    }
}

TEST_CASE("randomized inverse pair") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Uapp u;
    for (int t = 0; t < 5; ++t) {
        const double a = d(rng), b = d(rng), c = 0.5 + 0.5 * std::abs(d(rng));
        auto err = [&](std::size_t n) {
            auto g = ygrid(n);
            const Field U = Field::sample(g, [&](double Y) { return u(Y).u; });
            const OperatorContext ctx(U);
            const Field w = Field::sample(g, [&](double Y) { return (a * Y + b * Y * Y) * std::exp(-c * Y); });
            return max_abs_diff(op_Linv(ctx, op_L(ctx, w)), w);
        };
        const auto [p1, p2] = orders(err);
        CHECK(p2 >= 1.8);
    }
}

TEST_CASE("op_Linv rejects non-vanishing input") {
    auto g = ygrid(100);
    const Field U = Field::sample(g, [](double Y) { return Y + 0.5 * Y * Y; });
    const OperatorContext ctx(U);
    CHECK_THROWS_AS(op_Linv(ctx, Field::sample(g, [](double Y) { return Y; })), SingularInput);
    CHECK_THROWS_AS(op_Linv(ctx, Field(g, 1.0)), SingularInput);
    CHECK_NOTHROW(op_Linv(ctx, Field::sample(g, [](double Y) { return Y * Y; })));
}

TEST_CASE("context validation") {
    auto g = ygrid(100);
    CHECK_THROWS_AS(OperatorContext(Field::sample(g, [](double Y) { return 2 * Y; })), InvalidProfile);
}

TEST_CASE("op_cLU and the d2V identity") {
    Uapp u;
    auto g = ygrid(400);
    const Field U = Field::sample(g, [&](double Y) { return u(Y).u; });
    const OperatorContext ctx(U);
    const Field V = Field::sample(g, [](double Y) { return std::pow(Y, 7) * std::exp(-Y); });
    const Field c = op_cLU(ctx, V);
    const Field back = op_L(ctx, c);
    const Field V2 = diff(V, 2);
    double scale = 0.0;
    for (double v : V2.values) scale = std::max(scale, std::abs(v));
    CHECK(max_abs_diff(back, V2) < 1e-3 * scale);
    // O(Y) at the wall
    CHECK(std::abs(c[0]) < 1e-10);
    CHECK(std::abs(c[5] / c.node(5)) < 1.0);
    // V ≡ 0
    CHECK(max_abs_diff(op_cLU(ctx, Field(g, 0.0)), Field(g, 0.0)) == 0.0);
}

TEST_CASE("diffusion term") {
    auto g = ygrid(200);
    const Field U = Field::sample(g, [](double Y) { return Y + 0.5 * Y * Y; });
    const OperatorContext ctx(U, {1.0, 0.5, 0.0, 0.0});
    // rounding in U_YY amplified by 1/U^2 near the wall
    CHECK(max_abs_diff(op_diffusion(ctx), Field(g, 0.0)) < 1e-8);

    // polynomial part of U^app: D = -(b/2) Y + higher order
    const double b = 1e-3;
    auto g2 = Grid::tanh_clustered(1.5, 400, 2.0);
    const auto poly = uapp_polynomial();
    const Field Up = Field::sample(g2, [&](double Y) { return poly.evaluate(Y, b); });
    const OperatorContext c2(Up);
    const Field D = op_diffusion(c2);
    for (std::size_t i = 0; i < g2->size(); ++i) {
        const double Y = g2->nodes()[i];
        if (Y < 0.1 || Y > 1.0) continue;
        CHECK(D[i] / (-0.5 * b * Y) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("commutator with zero D vanishes") {
    auto g = ygrid(200);
    const Field U = Field::sample(g, [](double Y) { return Y + 0.5 * Y * Y; });
    const OperatorContext ctx(U);
    const Field w = Field::sample(g, [](double Y) { return Y * Y * std::exp(-Y); });
    CHECK(max_abs_diff(op_commutator(ctx, Field(g, 0.0), w), Field(g, 0.0)) == 0.0);
    CHECK(max_abs_diff(op_commutator(ctx, op_diffusion(ctx), Field(g, 0.0)), Field(g, 0.0)) == 0.0);
}

TEST_CASE("closed-form derivatives of the inverse") {
    Uapp u;
    auto g = ygrid(800);
    const Field U = Field::sample(g, [&](double Y) { return u(Y).u; });
    const OperatorContext ctx(U);
    const Field w = Field::sample(g, [](double Y) { return Y * Y * Y * std::exp(-0.3 * Y); });
    const Field direct = diff(op_Linv(ctx, w), 1);
    const Field formula = dLinv(ctx, w, 1);
    double scale = 0.0;
    for (double v : direct.values) scale = std::max(scale, std::abs(v));
    CHECK(max_abs_diff(direct, formula) < 1e-4 * scale);

    // U = Y + Y²/2, W = Y^5: hand-checked closed forms
    auto g2 = Grid::tanh_clustered(3.0, 800, 2.0);
    const Field U1 = Field::sample(g2, [](double Y) { return Y + 0.5 * Y * Y; });
    const OperatorContext c1(U1, {1.0, 0.5, 0.0, 0.0});
    const Field y5 = Field::sample(g2, [](double Y) { return std::pow(Y, 5); });
    const Field d2 = dLinv(c1, y5, 2);
    const Field d3 = dLinv(c1, y5, 3);
    for (std::size_t i = 1; i < g2->size(); i += 37) {
        const double Y = g2->nodes()[i], Uv = Y + 0.5 * Y * Y;
        if (Y < 0.05) continue;  // one-sided stencils on Y^5 at the first nodes
        const double e2 = (6 * std::pow(Y, 5) + 15 * std::pow(Y, 4)) / (Uv * Uv);
        const double e3 = 3 * std::pow(Y, 4) * (Y * Y + 6 * Y + 10) / (Uv * Uv * Uv);
        CHECK(d2[i] == doctest::Approx(e2).epsilon(1e-3));
        CHECK(d3[i] == doctest::Approx(e3).epsilon(1e-2));
    }
    CHECK_THROWS_AS(dLinv(c1, Field::sample(g2, [](double Y) { return Y * Y; }), 3), SingularInput);
}
