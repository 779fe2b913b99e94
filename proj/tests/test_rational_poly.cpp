#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "goldstein/certificate.hpp"
#include "goldstein/errors.hpp"
#include "goldstein/rational_poly.hpp"

#include <random>

using namespace goldstein;
using P = RationalPoly;

namespace {

P random_poly(std::mt19937& rng, int max_total) {
    std::uniform_int_distribution<int> deg(0, max_total);
    std::uniform_int_distribution<int> num(-50, 50);
    std::uniform_int_distribution<int> den(1, 30);
    P p;
    for (int t = 0; t < 8; ++t) {
        int y = deg(rng);
        int b = std::uniform_int_distribution<int>(0, max_total - y)(rng);
        int bs = std::uniform_int_distribution<int>(0, max_total - y - b)(rng);
        p.add_term({y, b, bs}, Rational(num(rng), den(rng)));
    }
    return p;
}

}  // namespace

TEST_CASE("arithmetic examples") {
    CHECK(poly_arith(P::Y(), P::Y(), ArithOp::add) == 2 * P::Y());
    const P u1 = P::Y() + Rational(1, 2) * P::Y(2);
    CHECK(poly_arith(u1, u1, ArithOp::mul) == P::Y(2) + P::Y(3) + Rational(1, 4) * P::Y(4));
    CHECK(poly_arith(P::monomial(1, 4, 1), P::monomial(1, 1, 0, 1), ArithOp::mul) == P::monomial(1, 5, 1, 1));
    CHECK(poly_arith(u1, u1, ArithOp::sub).is_zero());
}

TEST_CASE("antiderivative and s-derivative") {
    CHECK(antiderivative_Y(P::Y(2)) == Rational(1, 3) * P::Y(3));
    CHECK(antiderivative_Y(P(1)) == P::Y());
    CHECK(antiderivative_Y(P::monomial(1, 4, 1)) == P::monomial(Rational(1, 5), 5, 1));
    CHECK(s_derivative(P::monomial(1, 4, 1)) == P::monomial(1, 4, 0, 1));
    CHECK(s_derivative(P::monomial(1, 7, 2)) == P::monomial(2, 7, 1, 1));
    CHECK(s_derivative(Rational(1, 2) * P::Y(2)).is_zero());
    CHECK_THROWS_AS(s_derivative(P::Bs()), UnsupportedInput);
}

TEST_CASE("b_s substitution") {
    CHECK(substitute_bs(P::monomial(1, 4, 0, 1)) == P::monomial(-1, 4, 2));
    CHECK(substitute_bs((P::Bs() + P::B(2)) * P::Y(5)).is_zero());
    CHECK(substitute_bs(P::B() * P::Y()) == P::B() * P::Y());
}

TEST_CASE("degree cap") {
    CHECK_THROWS_AS(P::Y(kMaxDegree + 1), DegreeOverflow);
    CHECK_THROWS_AS(P::Y(30) * P::Y(30), DegreeOverflow);
}

TEST_CASE("apply_L") {
    const P u1 = P::Y() + Rational(1, 2) * P::Y(2);
    // (Y + Y^2/2) Y - (1 + Y) Y^2/2, expanded by hand
    CHECK(apply_L(u1, P::Y()) == Rational(1, 2) * P::Y(2));
    const P u = P::Y() + P::monomial(3, 3, 1) - P::monomial(Rational(2, 7), 5, 2);
    CHECK(apply_L(u, derivative_Y(u)).is_zero());

    const auto a = profile_coefficients();
    const P expected = Rational(7, 8) * P::Y(8) + Rational(3, 8) * P::Y(9) - P::monomial(a.a4 / 2, 11, 1) -
                       P::monomial(a.a7 / 8, 14, 2) + P::monomial(a.a10 / 4, 17, 3) +
                       P::monomial(Rational(3, 8) * a.a11, 18, 3);
    CHECK(apply_L(uapp_polynomial(), P::Y(7)) == expected);
}

TEST_CASE("residual and iterates") {
    CHECK(prandtl_residual(Rational(1, 2) * P::Y(2)).is_zero());
    const auto chain = iterate_chain(4);
    REQUIRE(chain.size() == 4);
    // U1 = Y + Y^2/2: U U_s = 0, -bU^2 + (3b/2) U_Y (Y^2/2 + Y^3/6) = -b Y^2/4 by hand
    CHECK(prandtl_residual(chain[0]) == P::monomial(Rational(-1, 4), 2, 1));

    const Rational a4(1, 48);
    CHECK(chain[1] == P::Y() + Rational(1, 2) * P::Y(2) - P::monomial(a4, 4, 1));
    const P res2 = -a4 * (Rational(4, 5) * P::Bs() + Rational(13, 10) * P::B(2)) * P::Y(5) -
                   Rational(3, 10) * a4 * (P::Bs() + P::B(2)) * P::Y(6) +
                   a4 * a4 / 5 * P::B() * (P::Bs() + P::B(2)) * P::Y(8);
    CHECK(prandtl_residual(chain[1]) == res2);
    CHECK(chain[2] == chain[1] - P::monomial(a4 / 84, 7, 2));

    const auto a = profile_coefficients();
    CHECK(a.a4 == a4);
    CHECK(a.a7 == Rational(1, 4032));
    CHECK(a.a10 == a.a7 * 27 / 1440);
    CHECK(a.a11 == a.a7 * 3 / 1760);
    CHECK(a.a10 == Rational(1, 215040));
    CHECK(a.a11 == Rational(1, 2365440));
    // Independent symbolic expansion of the U3 residual gives these two values.
    CHECK(a.a13 == a.a4 * a.a7 / 624);
    CHECK(a.a16 == a.a7 * a.a7 / 3840);
}

TEST_CASE("next_iterate preconditions") {
    CHECK_THROWS_AS(next_iterate(P(1) + P::Y()), InvalidProfile);
    CHECK_THROWS_AS(next_iterate(2 * P::Y()), InvalidProfile);
}

TEST_CASE("surviving pure-b part of the U4 residual starts at Y^8") {
    const auto chain = iterate_chain(4);
    const auto f = divide_by_bs_plus_b2(prandtl_residual(chain[3]));
    CHECK(f.remainder.min_degree_y() >= 8);
    const auto f3 = divide_by_bs_plus_b2(prandtl_residual(chain[2]));
    CHECK(f3.remainder.min_degree_y() == 8);
    CHECK(f3.remainder.coeff(8, 3) == Rational(-27, 16) / 4032);
}

TEST_CASE("remainder decomposition") {
    const auto a = profile_coefficients();
    const auto d = remainder_decomposition(uapp_polynomial());
    CHECK(d.coeff_bs_b2 == P::monomial(a.a4, 4) + P::monomial(2 * a.a7, 7, 1) + P::monomial(3 * a.a10, 10, 2) +
                               P::monomial(3 * a.a11, 11, 2));
    CHECK(d.coeff_b4 == P::monomial(a.a10, 10) + P::monomial(Rational(3, 2) * a.a11, 11));
    REQUIRE(d.d_constants.size() == 5);
    CHECK(d.d_constants[0].first == 11);
    CHECK(d.d_constants[0].second == 2 * a.a10 - a.a4 * a.a7 / 4);
    CHECK(d.d_constants[1].second == Rational(9, 4) * a.a11);
    CHECK_THROWS_AS(remainder_decomposition(P::Y() + Rational(1, 2) * P::Y(2) - P::monomial(1, 5, 1)), AlgebraFailure);
}

TEST_CASE("V leading coefficients") {
    const auto v = leading_V_coefficients();
    CHECK(v.c_Y7 == Rational(-1, 2520));
    CHECK(v.c_Y8 == Rational(-1, 8960));
}

TEST_CASE("series inverse and c8") {
    const P u = P::Y() + Rational(1, 2) * P::Y(2);
    const P w = P::Y(3) - Rational(2, 3) * P::Y(5);
    const auto f = to_series(apply_L(u, w), 12);
    const auto back = linv_series(to_series(u, 12), f, 8);
    CHECK(from_series(back) == w);
    const Rational c8 = perturbation_c8();
    const auto g = cLU_power_series(to_series(u, 12), to_series(P::Y(7) + c8 * P::Y(8), 12), 2, 6);
    CHECK(g[2] == 0);
    CHECK(c8 == Rational(9, 32));
}

TEST_CASE("physical coefficients follow from b = -2 lambda^2 u''''(0)") {
    const auto a = profile_coefficients();
    const auto c = physical_coefficients();
    CHECK(c.c7 == 4 * a.a7);
    CHECK(c.c10 == 8 * a.a10);
    CHECK(c.c11 == 8 * a.a11);
}

TEST_CASE("randomized antiderivative and serialization round trip") {
    std::mt19937 rng(7);
    for (int i = 0; i < 50; ++i) {
        const P p = random_poly(rng, 20);
        CHECK(derivative_Y(antiderivative_Y(p)) == p);
        CHECK(P::parse(p.to_string()) == p);
    }
}

TEST_CASE("certificate") {
    const auto cert = build_certificate();
    auto find = [&](const std::string& n) {
        for (const auto& c : cert.identities)
            if (c.name == n) return c.pass;
        FAIL("missing identity " << n);
        return false;
    };
    CHECK(find("U2"));
    CHECK(find("U3"));
    CHECK(find("a4"));
    CHECK(find("a7"));
    CHECK(find("a10"));
    CHECK(find("a11"));
    CHECK(find("residual_stationary"));
    CHECK(find("remainder_bs_b2_part"));
    CHECK(find("remainder_b4_part"));
    CHECK(find("remainder_inverse_shape"));
    CHECK(find("V_coefficient_Y7"));
    CHECK(find("V_coefficient_Y8"));
    CHECK(find("kernel_L_U4"));

    CertificateOptions bad;
    bad.a4_override = Rational(1, 47);
    const auto tampered = build_certificate(bad);
    REQUIRE(tampered.first_failure().has_value());
    CHECK(*tampered.first_failure() == "U2");
}
