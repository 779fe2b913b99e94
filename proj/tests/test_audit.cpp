#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "goldstein/audit.hpp"
#include "goldstein/errors.hpp"

#include <cmath>

using namespace goldstein;

namespace {

constexpr double a4 = 1.0 / 48.0, a7 = 1.0 / 4032.0;
constexpr double a10 = 27.0 * a7 / 1440.0, a11 = 3.0 * a7 / 1760.0;

double W0(double psi) { return std::pow(6.0 * psi, 4.0 / 3.0) / 4.0; }

// residual of the rescaled W equation for ±Aψ^k b̃^p added to W0, by hand
double exact_residual(double psi, double b, double bt, double A, double k, double sign) {
    const double p = (3.0 * k - 2.0) / 4.0, c = sign * A * std::pow(bt, p);
    const double W = W0(psi) + c * std::pow(psi, k);
    const double Wp = std::pow(6.0, 4.0 / 3.0) / 3.0 * std::cbrt(psi) + c * k * std::pow(psi, k - 1.0);
    const double Wpp = std::pow(6.0, 4.0 / 3.0) / 9.0 * std::pow(psi, -2.0 / 3.0) + c * k * (k - 1.0) * std::pow(psi, k - 2.0);
    const double Ws = -c * p * b * std::pow(psi, k);
    return Ws - 2.0 * b * W + 1.5 * b * psi * Wp - std::sqrt(W) * Wpp + 2.0;
}

}  // namespace

TEST_CASE("max principle on the model profile") {
    const auto g = Grid::uniform(30.0, 600);
    const Field U = Field::sample(g, [](double Y) { return Y + 0.5 * Y * Y; });
    const auto r = max_principle_audit(U, 1e4, 1e-4, 0.25, 1.0);
    CHECK(r.pass());
    CHECK(r.samples == 2 * static_cast<long>(g->size()));
    CHECK(std::abs(r.worst_margin) < 1e-8);
}

TEST_CASE("max principle on the polynomial part of the approximate profile") {
    const double s = 1e4, b = 1.0 / s;
    const auto g = Grid::uniform(std::cbrt(s), 4000);
    const Field U = Field::sample(g, [&](double Y) {
        return Y + 0.5 * Y * Y - a4 * b * std::pow(Y, 4) - a7 * b * b * std::pow(Y, 7) -
               a10 * b * b * b * std::pow(Y, 10) - a11 * b * b * b * std::pow(Y, 11);
    });
    // U_YY = 1 - 12 a4 b Y² + ..., 12 a4 = 1/4
    CHECK(max_principle_audit(U, s, b, 0.5, 1.0).pass());
    const auto low = max_principle_audit(U, s, b, 0.2, 1.0);
    CHECK(low.violation_count > 0);
    CHECK(low.worst_margin < 0.0);
}

TEST_CASE("M0 of a quartic correction") {
    const double s0 = 400.0, M = 0.7;
    const auto g = Grid::uniform(std::sqrt(s0), 400);
    const Field UYY = Field::sample(g, [&](double Y) { return 1.0 - M * Y * Y / s0; });
    CHECK(initial_M0(UYY, s0, AuditTolerance{}) == doctest::Approx(M).epsilon(1e-8));
    CHECK(F_floor_alpha(0.1) == doctest::Approx(std::pow(6.0, 2.0 / 3.0)));
    CHECK(F_floor_alpha(1.0) == doctest::Approx(12.0));
}

TEST_CASE("transport thresholds") {
    CHECK(transport_threshold(7.0 / 3.0) == doctest::Approx(34.18).epsilon(1e-3));
    CHECK(transport_threshold(10.0 / 3.0) == doctest::Approx(23.3).epsilon(2e-3));
    CHECK(default_C_minus() == transport_threshold(7.0 / 3.0));
    // at ψ = C_k b^{-3/4} transport exceeds 4/6^{4/3}(9k²-9k+2)ψ^{-4/3} by 2^{4/3}
    for (double k : {7.0 / 3.0, 10.0 / 3.0, 3.0}) {
        const double b = 1e-4, psi = transport_threshold(k) * std::pow(b, -0.75);
        const double ratio = 0.75 * (k - 2.0) * b /
                             (4.0 / std::pow(6.0, 4.0 / 3.0) * (9.0 * k * k - 9.0 * k + 2.0) * std::pow(psi, -4.0 / 3.0));
        CHECK(ratio == doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-10));
    }
}

TEST_CASE("comparison residuals") {
    SUBCASE("the blow-up profile solves the equation") {
        for (double psi : {10.0, 1e3, 1e6}) {
            const auto c = comparison_residuals(psi, 1e-3, 1e-3, 0.0, 0.0);
            CHECK(std::abs(c.sub) < 1e-5 * c.scale_sub);
            CHECK(std::abs(c.super) < 1e-5 * c.scale_super);
        }
    }
    SUBCASE("against hand derivatives") {
        const double b = 1.1e-4, bt = 0.9e-4, Am = 0.3, Ap = 0.02;
        for (double psi : {1e4, 1e5, 1e6}) {
            const auto c = comparison_residuals(psi, b, bt, Am, Ap);
            CHECK(c.sub == doctest::Approx(exact_residual(psi, b, bt, Am, 7.0 / 3.0, -1.0)).epsilon(1e-5).scale(c.scale_sub));
            CHECK(c.super == doctest::Approx(exact_residual(psi, b, bt, Ap, 10.0 / 3.0, 1.0)).epsilon(1e-5).scale(c.scale_super));
        }
    }
    SUBCASE("transport part") {
        // with the diffusion of W0 exact, the residual at A and b̃ reduces to
        // ±A 3(k-2)/4 b b̃^p ψ^k plus the diffusion change
        const double b = 2e-4, bt = 2e-4, A = 0.5, psi = 3e4, k = 7.0 / 3.0, p = 1.25;
        const double with = exact_residual(psi, b, bt, A, k, -1.0);
        const double W = W0(psi) - A * std::pow(bt, p) * std::pow(psi, k);
        const double Wpp = std::pow(6.0, 4.0 / 3.0) / 9.0 * std::pow(psi, -2.0 / 3.0) -
                           A * std::pow(bt, p) * k * (k - 1.0) * std::pow(psi, k - 2.0);
        const double diffusion = -std::sqrt(W) * Wpp + 2.0;
        CHECK(with - diffusion == doctest::Approx(-A * 0.75 * (k - 2.0) * b * std::pow(bt, p) * std::pow(psi, k)));
    }
}

TEST_CASE("sub and super solutions around the blow-up profile") {
    const double bt = 1e-4, b = 1e-4;
    const auto g = Grid::geometric(1.0, 1e8, 2000);
    const Field W = Field::sample(g, W0);
    for (double A : {0.125, 1.0, 8.0}) {
        const auto r = subsolution_audit(W, 1.0 / bt, b, bt, A, A, default_C_minus(), AuditTolerance{});
        CHECK(r.pass());
        CHECK(r.samples > 200);
    }
    // W above W_+ somewhere in range
    Field bad = W;
    const std::size_t i = g->locate(1e6);
    bad[i] = 2.0 * W_plus(g->nodes()[i], bt, 1.0);
    CHECK(subsolution_audit(bad, 1.0 / bt, b, bt, 1.0, 1.0, default_C_minus(), AuditTolerance{}).violation_count >= 1);
    // nothing to check when the range starts past the grid
    CHECK_FALSE(subsolution_audit(W, 1.0 / bt, b, 1e-15, 1.0, 1.0, default_C_minus(), AuditTolerance{}).pass());
}

TEST_CASE("dyadic calibration") {
    CHECK(calibrate_dyadic([](double A) { return A >= 0.3; }) == 0.5);
    CHECK(calibrate_dyadic([](double A) { return A >= 1.0; }) == 1.0);
    CHECK(std::isnan(calibrate_dyadic([](double) { return false; })));
}

TEST_CASE("expansion of W at psi of order s^(3/4)") {
    const double s = 1e6, b = 1.0 / s;
    const auto g = Grid::geometric(1e-2, 1e7, 4000);
    const Field exact = Field::sample(g, [&](double psi) {
        const double z = std::pow(6.0 * psi, 2.0 / 3.0);
        return z * z / 4.0 * (1.0 + 2.0 / z - 2.4 * a4 * b * z);
    });
    auto e = expansion_check(exact, s, b);
    CHECK(e.samples > 50);
    CHECK(e.max_ratio < 1e-8);
    CHECK(e.correction_ratio > 1.0);
    // dropping the b correction is visible
    e = expansion_check(Field::sample(g, [](double psi) { return W0(psi) * (1.0 + 2.0 / std::pow(6.0 * psi, 2.0 / 3.0)); }), s, b);
    CHECK(e.max_ratio > 1.0);
}

TEST_CASE("F bounds") {
    const double bt = 1e-4;
    const auto g = Grid::geometric(1e-3, 1e8, 1000);
    Field F(g, 0.0);
    auto r = F_bound_audit(F, 1.0 / bt, bt, F_floor_alpha(1.0), default_C_minus(), 1.0, AuditTolerance{});
    CHECK(r.pass());
    CHECK(r.worst_margin == 0.0);
    F[10] = 1e-3;
    CHECK(F_bound_audit(F, 1.0 / bt, bt, 12.0, default_C_minus(), 1.0, AuditTolerance{}).violation_count == 1);
    F[10] = 0.0;
    // a dip below the floor inside the checked range
    const std::size_t i = g->locate(1e5);
    F[i] = -2.0 * bt * 12.0 * std::pow(g->nodes()[i], 2.0 / 3.0);
    CHECK(F_bound_audit(F, 1.0 / bt, bt, 12.0, default_C_minus(), 1.0, AuditTolerance{}).violation_count == 1);
    // the same dip outside it is not
    F[i] = 0.0;
    F[5] = -1.0;
    CHECK(F_bound_audit(F, 1.0 / bt, bt, 12.0, default_C_minus(), 1.0, AuditTolerance{}).pass());
}

TEST_CASE("tolerance") {
    const AuditTolerance t{1e-4};
    CHECK(t.at(2.0) == doctest::Approx(2e-3));
    CHECK(t.at(0.0) == 1e-10);
    CHECK(tolerance_for(Grid::uniform(1.0, 100)).h2 == doctest::Approx(1e-4));
}

TEST_CASE("Hardy quotient in closed form") {
    for (double mu : {1.0, 0.999, 0.9, 0.6})
        for (double r : {1e-3, 0.05, 0.7, 4.0, 60.0, 2e3}) {
            const double q = hardy_phi(r, 0.0, mu), c = hardy_phi_closed(r, mu);
            CHECK(std::abs(q - c) < 1e-8);
        }
    // increasing in r towards 2/9 for μ = 1
    double prev = 0.0;
    for (double r = 1e-3; r < 1e4; r *= 1.5) {
        const double v = hardy_phi_closed(r, 1.0);
        CHECK(v > prev);
        CHECK(v < 2.0 / 9.0);
        prev = v;
    }
    CHECK_THROWS_AS(hardy_phi(-1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("Hardy constants") {
    const double C0 = hardy_constant(0.0, 1.0);
    CHECK(std::abs(C0 / 4.0 - 2.0 / 9.0) < 1e-3);
    CHECK(C0 == doctest::Approx(8.0 / 9.0).epsilon(1e-3));
    CHECK(hardy_constant(0.01, 0.999) <= 0.9);
    // Lipschitz in a near 0; the r → ∞ value 8/(3+a)² falls with a
    for (double a : {0.005, 0.01, 0.02}) {
        const double Ca = hardy_constant(a, 1.0);
        CHECK(std::abs(Ca - C0) <= a);
        CHECK(Ca >= 8.0 / ((3.0 + a) * (3.0 + a)) - 1e-12);
    }
    CHECK_THROWS_AS(hardy_constant(0.0, 1.5), DomainError);
}

TEST_CASE("general Hardy constant") {
    auto one = [](double) { return 1.0; };
    const auto flat = hardy_general(one, one, 1.0);
    CHECK_FALSE(flat.infinite);
    CHECK(flat.value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(flat.r_at_sup == doctest::Approx(0.5).epsilon(1e-4));

    const double a = 0.01;
    auto p1 = [&](double Y) {
        const double U = Y + 0.5 * Y * Y;
        return std::pow(Y, -a) / (U * U);
    };
    auto p2 = [&](double Y) { return std::pow(Y, -a) / (Y + 0.5 * Y * Y); };
    const auto pair = hardy_general(p1, p2, 1e4);
    CHECK(pair.value <= 0.9);
    CHECK(std::abs(pair.value - hardy_constant(a, 1.0)) < 1e-3);

    CHECK(hardy_general(one, [](double t) { return t; }, 1.0).infinite);
}

TEST_CASE("audit json") {
    AuditReport ok{"x", "Y in [0, 1]", 0.5, 0, 10};
    AuditReport bad{"y", "psi", -1.0, 3, 10};
    const auto j = audit_json({ok, bad});
    REQUIRE(j.size() == 2);
    for (const char* k : {"name", "domain_checked", "worst_margin", "violation_count", "samples", "pass"})
        CHECK(j[0].contains(k));
    CHECK(j[0]["pass"].get<bool>());
    CHECK_FALSE(j[1]["pass"].get<bool>());
    CHECK(j[1]["violation_count"].get<long>() == 3);
}

TEST_CASE("rescaled snapshot") {
    const auto d = build_initial_data(0.05, default_y_grid());
    MarchConfig cfg;
    cfg.lambda_stop = 0.05 / 50;
    const auto t = solve_until_separation(d, cfg);
    const auto hist = modulation_history(t);
    REQUIRE(t.snapshots.size() > 10);
    const auto r = rescale_snapshot(t, t.snapshots[8], hist);
    CHECK(r.s > t.s0);
    CHECK(r.tol.h2 > 0.0);
    CHECK(r.tol.h2 < 1e-3);
    // W = U² at matching indices and ψ = ∫U
    for (std::size_t i : {200, 800, 1200}) CHECK(r.W[i] == doctest::Approx(r.U[i] * r.U[i]).epsilon(1e-12));
    // U_YY from F against differences of U on the bulk nodes
    const Field d2 = diff(r.U, 2, 9);
    for (std::size_t i = 400; i < 1400; i += 100) CHECK(std::abs(d2[i] - r.UYY[i]) < 1e-3);
    // the expansion holds at the scale of its remainder
    const auto e = expansion_check(r.W, r.s, r.b);
    CHECK(e.samples > 20);
    CHECK(e.max_ratio < 1.0);
}
