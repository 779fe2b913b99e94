#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "goldstein/errors.hpp"
#include "goldstein/profile.hpp"
#include "goldstein/rational_poly.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace goldstein;

TEST_CASE("Theta") {
    const Theta th;
    for (double xi = 0.0; xi <= 0.5; xi += 0.05) CHECK(th.value(xi) == 0.5 * xi * xi);
    double prev = th.value(0.5);
    for (double xi = 0.51; xi < 20.0; xi += 0.01) {
        const double v = th.value(xi);
        CHECK(v > prev);
        CHECK(th.d2(xi) <= 1.0);
        prev = v;
    }
    CHECK(std::abs(th.value(10.0) - 1.0) < 1e-6);
    // C^2 at the junction
    CHECK(th.value(0.5 + 1e-9) == doctest::Approx(0.125).epsilon(1e-8));
    CHECK(th.d1(0.5 + 1e-12) == doctest::Approx(0.5));
    CHECK(th.d2(0.5 + 1e-12) == doctest::Approx(1.0));
    // derivatives against central differences
    const double h = 1e-5;
    for (double xi : {0.7, 1.3, 4.0}) {
        CHECK((th.value(xi + h) - th.value(xi - h)) / (2 * h) == doctest::Approx(th.d1(xi)).epsilon(1e-8));
        CHECK((th.d1(xi + h) - th.d1(xi - h)) / (2 * h) == doctest::Approx(th.d2(xi)).epsilon(1e-7));
    }
}

TEST_CASE("chi") {
    CHECK(chi(0.3) == 1.0);
    CHECK(chi(1.0) == 1.0);
    CHECK(chi(2.0) == 0.0);
    CHECK(chi(5.0) == 0.0);
    CHECK(chi(1.5) == doctest::Approx(0.5));
    CHECK(chi_d1(1.0) == 0.0);
    CHECK(chi_d2(2.0) == 0.0);
}

TEST_CASE("eval_uapp") {
    const auto p = ApproxProfileParams::from_algebra();
    const double s = 1e4, b = 1.0 / s;
    CHECK(eval_uapp(s, b, 0.0, p) == 0.0);
    const auto v0 = eval_uapp_full(s, b, 0.0, p);
    CHECK(v0.uy == doctest::Approx(1.0));
    CHECK(v0.uyy == doctest::Approx(1.0));
    const double h = 1e-6;
    CHECK((eval_uapp(s, b, h, p) - eval_uapp(s, b, 0.0, p)) / h == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(eval_uapp(s, b, 2000.0, p) == doctest::Approx(1.0 / b).epsilon(1e-6));
    CHECK_THROWS_AS(eval_uapp(-1.0, b, 1.0, p), DomainError);
    CHECK_THROWS_AS(eval_uapp(s, 0.0, 1.0, p), DomainError);

    // agreement with the exact polynomial where χ ≡ 1 and Θ = ξ²/2
    const auto poly = uapp_polynomial();
    const double L = std::pow(s, 2.0 / 7.0);
    for (double Y = 0.01; Y <= 0.5 * L; Y *= 1.3) {
        const double exact = poly.evaluate(Y, b);
        CHECK(std::abs(eval_uapp(s, b, Y, p) - exact) <= 1e-12 * std::abs(exact));
    }
}

TEST_CASE("completed profile matches U^app near the wall and stays admissible") {
    const auto p = ApproxProfileParams::from_algebra();
    const double s = 800.0;
    const CompletedProfile U0(s, 1.0 / s, p);
    for (double Y = 0.0; Y <= U0.cutoff(); Y += 0.05)
        CHECK(U0.value(Y) == doctest::Approx(eval_uapp(s, 1.0 / s, Y, p)).epsilon(1e-13));
    double prev = -1.0;
    for (double Y = 0.0; Y < 12.0 * std::sqrt(s); Y += 0.03) {
        const auto v = U0.eval(Y);
        CHECK(v.uyy <= 1.0 + 1e-13);
        CHECK(v.u > prev);
        prev = v.u;
    }
    CHECK(U0.delta() > 0.0);
}

TEST_CASE("build_initial_data") {
    auto g = Grid::geometric(1e-8, 20.0, 2000);
    const auto d = build_initial_data(0.05, g);
    const auto w = d.eval(0.0);
    CHECK(w.uy == doctest::Approx(0.05));
    CHECK(w.uyy == doctest::Approx(1.0));
    CHECK(d.u0[0] == 0.0);
    for (std::size_t i = 1; i < d.u0.size(); ++i) {
        CHECK(d.u0[i] >= d.u0[i - 1]);
        CHECK(d.eval(d.u0.node(i)).uy > 0.0);
        CHECK(d.eval(d.u0.node(i)).uyy <= 1.0);
    }
    // far field matches u_E(0) = √2
    CHECK(d.u0.values.back() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    // compatibility: (u0'' - 1)/y² has a finite limit -12 a4 b0 / λ0²
    const double a4 = 1.0 / 48.0;
    for (double y : {1e-4, 1e-3, 1e-2}) {
        const double slope = (d.eval(y).uyy - 1.0) / (y * y);
        CHECK(slope == doctest::Approx(-12.0 * a4 * d.b0 / (0.05 * 0.05)).epsilon(1e-2));
    }
    // b0 = -2 λ0² u0''''(0), with u0'''' from the coefficient of y^4
    const double y = 1e-3;
    const double u4 = 24.0 * (d.eval(y).u - 0.05 * y - 0.5 * y * y) / std::pow(y, 4);
    CHECK(-2.0 * 0.05 * 0.05 * u4 == doctest::Approx(d.b0).epsilon(1e-3));
    CHECK(d.b0_half == doctest::Approx(0.5 * d.b0));
    CHECK(d.c7 == doctest::Approx(1.0 / 1008.0));
    CHECK(d.c8 == doctest::Approx(9.0 / 32.0));

    CHECK(d.perturbation_amplitude == 0.0);
    CHECK_THROWS_AS(build_initial_data(0.3, g), DomainError);
    CHECK_THROWS_AS(build_initial_data(0.0, g), DomainError);
}

TEST_CASE("initial data CSV") {
    auto g = Grid::geometric(1e-6, 20.0, 200);
    const auto d = build_initial_data(0.1, g);
    const auto path = std::filesystem::temp_directory_path() / "goldstein_u0.csv";
    write_initial_data_csv(d, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "y,u0,u0_prime,u0_second");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == static_cast<int>(g->size()));
    std::filesystem::remove(path);
}
