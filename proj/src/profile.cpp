#include "goldstein/profile.hpp"

#include "goldstein/errors.hpp"
#include "goldstein/rational_poly.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>

namespace goldstein {

double Theta::mu() const { return (2.0 + std::sqrt(18.0)) / 3.5; }

double Theta::value(double xi) const {
    if (xi <= c0) return 0.5 * xi * xi;
    const double m = mu(), k = m + 2.0, t = xi - c0, e = std::exp(-m * t);
    return 0.5 * c0 * c0 + c0 * ((1.0 - e) / m + k * (1.0 / (m * m) - e * (t / m + 1.0 / (m * m))));
}

double Theta::d1(double xi) const {
    if (xi <= c0) return xi;
    const double m = mu(), t = xi - c0;
    return c0 * (1.0 + (m + 2.0) * t) * std::exp(-m * t);
}

double Theta::d2(double xi) const {
    if (xi <= c0) return 1.0;
    const double m = mu(), k = m + 2.0, t = xi - c0;
    return c0 * std::exp(-m * t) * (k - m - k * m * t);
}

double smoothstep(double z) {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return z * z * z * (10.0 + z * (-15.0 + 6.0 * z));
}

double smoothstep_d1(double z) {
    if (z <= 0.0 || z >= 1.0) return 0.0;
    return 30.0 * z * z * (1.0 - z) * (1.0 - z);
}

namespace {

double smoothstep_d2(double z) {
    if (z <= 0.0 || z >= 1.0) return 0.0;
    return 60.0 * z * (1.0 - z) * (1.0 - 2.0 * z);
}

// ∫_0^z S
double smoothstep_int(double z) {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 0.5 + (z - 1.0);
    return z * z * z * z * (2.5 + z * (-3.0 + z));
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace

double chi(double z) { return 1.0 - smoothstep(z - 1.0); }
double chi_d1(double z) { return -smoothstep_d1(z - 1.0); }
double chi_d2(double z) { return -smoothstep_d2(z - 1.0); }

ApproxProfileParams ApproxProfileParams::from_algebra() {
    const auto a = profile_coefficients();
    ApproxProfileParams p;
    p.a4 = to_double(a.a4);
    p.a7 = to_double(a.a7);
    p.a10 = to_double(a.a10);
    p.a11 = to_double(a.a11);
    return p;
}

double ApproxProfileParams::correction(double b, double Y, int k) const {
    const double b2 = b * b, b3 = b2 * b;
    // c Y^n differentiated k times
    auto term = [&](double c, int n) {
        double f = c;
        for (int j = 0; j < k; ++j) f *= (n - j);
        return n - k >= 0 ? f * std::pow(Y, n - k) : 0.0;
    };
    return -term(a4 * b, 4) - term(a7 * b2, 7) - term(a10 * b3, 10) - term(a11 * b3, 11);
}

ProfileValue eval_uapp_full(double s, double b, double Y, const ApproxProfileParams& p) {
    if (!(s > 0.0) || !(b > 0.0)) throw DomainError("eval_uapp needs s > 0 and b > 0");
    if (Y < 0.0) throw DomainError("eval_uapp needs Y >= 0");
    const double L = std::pow(s, p.cutoff_scale_exponent);
    const double z = Y / L;
    const double c = chi(z), c1 = chi_d1(z) / L, c2 = chi_d2(z) / (L * L);
    const double q = Y + p.correction(b, Y, 0);
    const double q1 = 1.0 + p.correction(b, Y, 1);
    const double q2 = p.correction(b, Y, 2);
    const double rb = std::sqrt(b);
    const double xi = rb * Y;
    ProfileValue v;
    v.u = c * q + p.theta.value(xi) / b;
    v.uy = c1 * q + c * q1 + p.theta.d1(xi) / rb;
    v.uyy = c2 * q + 2.0 * c1 * q1 + c * q2 + p.theta.d2(xi);
    return v;
}

double eval_uapp(double s, double b, double Y, const ApproxProfileParams& p) {
    return eval_uapp_full(s, b, Y, p).u;
}

Field eval_uapp(double s, double b, GridPtr grid, const ApproxProfileParams& p) {
    return Field::sample(std::move(grid), [&](double Y) { return eval_uapp(s, b, Y, p); });
}

CompletedProfile::CompletedProfile(double s, double b, ApproxProfileParams params)
    : s_(s), b_(b), L_(std::pow(s, params.cutoff_scale_exponent)), delta_(0.0), p_(params) {
    delta_ = -r_part(2.0 * L_, 1);
    R2L_ = r_part(2.0 * L_, 0);
}

double CompletedProfile::r_part(double Y, int k) const {
    const double L = L_;
    if (Y <= L) return p_.correction(b_, Y, k);
    const double y = std::min(Y, 2.0 * L);
    using boost::math::quadrature::gauss;
    // Polynomial integrands of degree <= 15: the 8-point rule is exact.
    auto kernel = [&](double t) { return chi(t / L) * p_.correction(b_, t, 2); };
    const double r1 = p_.correction(b_, L, 1) + gauss<double, 8>::integrate(kernel, L, y);
    if (k == 2) return Y >= 2.0 * L ? 0.0 : kernel(Y);
    if (k == 1) return r1;
    const double r0 = p_.correction(b_, L, 0) + p_.correction(b_, L, 1) * (y - L) +
                      gauss<double, 8>::integrate([&](double t) { return (y - t) * kernel(t); }, L, y);
    return r0 + (Y - y) * r1;
}

ProfileValue CompletedProfile::eval(double Y) const {
    const double L = L_, z = (Y - L) / L;
    const double rb = std::sqrt(b_), xi = rb * Y;
    ProfileValue v;
    v.u = Y - (1.0 - delta_) * L * smoothstep_int(z) + r_part(Y, 0) + p_.theta.value(xi) / b_;
    // beyond 2L the q and R slopes cancel exactly
    v.uy = (Y >= 2.0 * L ? 0.0 : 1.0 - (1.0 - delta_) * smoothstep(z) + r_part(Y, 1)) + p_.theta.d1(xi) / rb;
    v.uyy = -(1.0 - delta_) * smoothstep_d1(z) / L + r_part(Y, 2) + p_.theta.d2(xi);
    return v;
}

double CompletedProfile::far_value() const {
    const double Y = 2.0 * L_;
    return Y - (1.0 - delta_) * L_ * smoothstep_int(1.0) + R2L_ + 1.0 / b_;
}

ProfileValue InitialData::eval(double y) const {
    const double Y = y / lambda0;
    const auto U = profile.eval(Y);
    ProfileValue v{lambda0 * lambda0 * U.u, lambda0 * U.uy, U.uyy};
    if (perturbation_amplitude != 0.0) {
        const double A = perturbation_amplitude * std::pow(lambda0, -1.5);
        const double Ly = lambda0 * profile.cutoff();
        const double z = y / Ly;
        const double c = chi(z), c1 = chi_d1(z) / Ly, c2 = chi_d2(z) / (Ly * Ly);
        const double y6 = std::pow(y, 6);
        const double p = lambda0 * y6 * y + c8 * y6 * y * y;
        const double p1 = 7.0 * lambda0 * y6 + 8.0 * c8 * y6 * y;
        const double p2 = 42.0 * lambda0 * std::pow(y, 5) + 56.0 * c8 * y6;
        v.u += A * c * p;
        v.uy += A * (c1 * p + c * p1);
        v.uyy += A * (c2 * p + 2.0 * c1 * p1 + c * p2);
    }
    return v;
}

InitialData build_initial_data(double lambda0, GridPtr grid, double perturbation_amplitude, double x0) {
    if (!(lambda0 > 0.0) || lambda0 > 0.2) throw DomainError("lambda0 must lie in (0, 0.2]");
    if (perturbation_amplitude < 0.0) throw DomainError("perturbation amplitude must be non-negative");
    const auto params = ApproxProfileParams::from_algebra();
    const double uE = std::sqrt(2.0 * x0);

    auto mismatch = [&](double s) { return lambda0 * lambda0 * CompletedProfile(s, 1.0 / s, params).far_value() - uE; };
    double lo = 0.25 * uE / (lambda0 * lambda0), hi = 4.0 * uE / (lambda0 * lambda0);
    lo = std::max(lo, 2.0);
    if (mismatch(lo) > 0.0 || mismatch(hi) < 0.0) throw InvalidInitialData("far-field matching has no root");
    std::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(mismatch, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                                    iters);
    const double s0 = 0.5 * (a + b);

    InitialData d;
    d.lambda0 = lambda0;
    d.x0 = x0;
    d.s0 = s0;
    d.b0 = 1.0 / s0;
    d.b0_half = 0.5 / s0;
    d.perturbation_amplitude = perturbation_amplitude;
    const auto pc = physical_coefficients();
    d.c7 = to_double(pc.c7);
    d.c10 = to_double(pc.c10);
    d.c11 = to_double(pc.c11);
    d.c8 = to_double(perturbation_c8());
    d.profile = CompletedProfile(s0, 1.0 / s0, params);

    std::vector<double> u(grid->size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = d.eval((*grid)[i]).u;
    // the far field is flat to rounding; remove last-bit wiggles
    for (std::size_t i = 1; i < u.size(); ++i) u[i] = std::max(u[i], u[i - 1]);
    d.u0 = Field(grid, std::move(u));

    if (d.u0[0] != 0.0) throw InvalidInitialData("u0(0) != 0");
    for (std::size_t i = 1; i < d.u0.size(); ++i) {
        const auto v = d.eval((*grid)[i]);
        if (d.u0[i] < d.u0[i - 1] || !(v.uy > 0.0)) throw InvalidInitialData("u0 not strictly increasing at node " + std::to_string(i));
        if (v.uyy > 1.0 + 1e-12) throw InvalidInitialData("u0'' exceeds 1 at node " + std::to_string(i));
    }
    return d;
}

void write_initial_data_csv(const InitialData& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw MissingInput("cannot open " + path.string());
    out << "y,u0,u0_prime,u0_second\n" << std::setprecision(17);
    for (std::size_t i = 0; i < data.u0.size(); ++i) {
        const double y = data.u0.node(i);
        const auto v = data.eval(y);
        out << y << ',' << v.u << ',' << v.uy << ',' << v.uyy << '\n';
    }
}

}  // namespace goldstein
