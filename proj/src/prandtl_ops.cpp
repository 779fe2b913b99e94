#include "goldstein/prandtl_ops.hpp"

#include "goldstein/errors.hpp"

#include <algorithm>
#include <cmath>

namespace goldstein {

namespace {

using Series4 = std::array<double, 4>;

Series4 mul(const Series4& a, const Series4& b) {
    Series4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; i + j < 4; ++j) r[i + j] += a[i] * b[j];
    return r;
}

Series4 inverse(const Series4& a) {
    Series4 r{};
    r[0] = 1.0 / a[0];
    for (int n = 1; n < 4; ++n) {
        double acc = 0.0;
        for (int j = 1; j <= n; ++j) acc += a[j] * r[n - j];
        r[n] = -acc / a[0];
    }
    return r;
}

// Value at node 0 extrapolated from nodes 1..4.
double extrapolate_to_wall(const Field& f) {
    const auto& x = f.grid->nodes();
    const auto w = fd_weights(0.0, std::span<const double>(x.data() + 1, 4), 0);
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) acc += w[0][j] * f[1 + j];
    return acc;
}

}  // namespace

std::array<double, 4> wall_series(const Field& f, int k) {
    const auto& x = f.grid->nodes();
    double g[4];
    for (int i = 0; i < 4; ++i) g[i] = f[1 + i] / std::pow(x[1 + i], k);
    const auto w = fd_weights(0.0, std::span<const double>(x.data() + 1, 4), 3);
    Series4 c{};
    const double fact[4] = {1.0, 1.0, 2.0, 6.0};
    for (int d = 0; d < 4; ++d) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += w[d][j] * g[j];
        c[d] = acc / fact[d];
    }
    return c;
}

void require_quadratic_vanishing(const Field& f, const char* what) {
    const auto& x = f.grid->nodes();
    const auto w = fd_weights(0.0, std::span<const double>(x.data(), 6), 1);
    double f0 = 0.0, f1 = 0.0, local = 0.0;
    for (int j = 0; j < 6; ++j) {
        f0 += w[0][j] * f[j];
        f1 += w[1][j] * f[j];
        local = std::max(local, std::abs(f[j]));
    }
    double global = 0.0;
    for (double v : f.values) global = std::max(global, std::abs(v));
    const double defect = std::abs(f0) + std::abs(f1) * x[5];
    if (defect > 1e-2 * local + 1e-9 * std::max(global, 1.0))
        throw SingularInput(std::string(what) + " does not vanish quadratically at Y = 0");
}

OperatorContext::OperatorContext(Field U, double slope_tol)
    : U_(std::move(U)), UY_(diff(U_, 1)), UYY_(diff(U_, 2)) {
    c_ = wall_series(U_, 1);
    validate(slope_tol);
}

OperatorContext::OperatorContext(Field U, std::array<double, 4> expansion, double slope_tol)
    : U_(std::move(U)), UY_(diff(U_, 1)), UYY_(diff(U_, 2)), c_(expansion) {
    validate(slope_tol);
}

void OperatorContext::validate(double slope_tol) const {
    if (std::abs(c_[0] - 1.0) > slope_tol)
        throw InvalidProfile("U_Y(0) = " + std::to_string(c_[0]) + " is not normalized to 1");
    for (std::size_t i = 1; i < U_.size(); ++i)
        if (!(U_[i] > 0.0)) throw InvalidProfile("U must be positive for Y > 0");
}

namespace {

// ∫_{a}^{b} of the cubic interpolating (xs[j], ys[j]), j = 0..3
double cubic_cell_integral(const double* xs, const double* ys, double a, double b) {
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
        // basis polynomial in t = x - a, built by multiplying out the linear factors
        double c[4] = {1.0, 0.0, 0.0, 0.0};
        double den = 1.0;
        int deg = 0;
        for (int m = 0; m < 4; ++m) {
            if (m == j) continue;
            const double r = xs[m] - a;
            for (int d = deg + 1; d >= 1; --d) c[d] = c[d - 1] - r * c[d];
            c[0] *= -r;
            ++deg;
            den *= xs[j] - xs[m];
        }
        const double h = b - a;
        double integral = 0.0, hp = h;
        for (int d = 0; d < 4; ++d, hp *= h) integral += c[d] * hp / (d + 1);
        acc += ys[j] * integral / den;
    }
    return acc;
}

}  // namespace

Field OperatorContext::wall_cumint(const Field& f, int k, int p) const {
    if (k < p) throw DomainError("wall_cumint needs k >= p");
    const auto& x = grid()->nodes();
    const Series4 g = wall_series(f, k);
    Series4 e = inverse(c_);
    Series4 ep{1.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < p; ++i) ep = mul(ep, e);
    const Series4 h = mul(g, ep);
    const int m = k - p;
    auto series_int = [&](double y) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += h[j] * std::pow(y, j + m + 1) / (j + m + 1);
        return acc;
    };
    auto integrand = [&](std::size_t i) { return f[i] / std::pow(U_[i], p); };
    Field r(grid());
    const std::size_t patch = std::min<std::size_t>(3, x.size() - 1);
    for (std::size_t i = 1; i <= patch; ++i) r[i] = series_int(x[i]);
    // cubic through four surrounding nodes on each cell; the trapezoid rule
    // leaves an O(1) relative error at a fixed node index near the wall
    const std::size_t n = x.size();
    std::vector<double> q(n, 0.0);
    for (std::size_t i = patch; i < n; ++i) q[i] = integrand(i);
    for (std::size_t i = patch + 1; i < n; ++i) {
        std::size_t j0 = i >= 2 ? i - 2 : 0;
        j0 = std::clamp(j0, patch, n >= 4 ? n - 4 : 0);
        if (j0 + 4 > n || j0 < patch) {
            r[i] = r[i - 1] + 0.5 * (x[i] - x[i - 1]) * (q[i - 1] + q[i]);
            continue;
        }
        r[i] = r[i - 1] + cubic_cell_integral(&x[j0], &q[j0], x[i - 1], x[i]);
    }
    return r;
}

Field op_L(const OperatorContext& ctx, const Field& w) {
    return ctx.U() * w - ctx.UY() * cumint(w);
}

Field op_Linv(const OperatorContext& ctx, const Field& f) {
    require_quadratic_vanishing(f, "L_U^{-1} argument");
    const Field I = ctx.wall_cumint(f, 2, 2);
    Field r = ctx.UY() * I;
    for (std::size_t i = 1; i < r.size(); ++i) r[i] += f[i] / ctx.U()[i];
    return r;
}

Field op_cLU(const OperatorContext& ctx, const Field& v) { return op_Linv(ctx, diff(v, 2)); }

Field op_diffusion(const OperatorContext& ctx) {
    Field f = ctx.UYY();
    for (auto& v : f.values) v -= 1.0;
    return op_Linv(ctx, f);
}

Field op_commutator(const OperatorContext& ctx, const Field& D, const Field& w) {
    require_quadratic_vanishing(w, "commutator argument");
    const Field I1 = ctx.wall_cumint(w, 2, 2);
    const Field I2 = ctx.wall_cumint(w * D, 3, 3);
    return -1.0 * diff(D * I1, 1) + 2.0 * diff(ctx.U() * I2, 1);
}

Field dLinv(const OperatorContext& ctx, const Field& w, int order) {
    if (order < 1 || order > 3) throw DomainError("dLinv order must be 1, 2 or 3");
    require_quadratic_vanishing(w, "dLinv argument");
    if (order == 3) {
        // O(Y^3): the quadratic coefficient must vanish too.
        const auto g = wall_series(w, 2);
        double scale = 0.0;
        for (std::size_t i = 1; i <= 4; ++i) scale = std::max(scale, std::abs(w[i]) / std::pow(w.node(i), 2));
        if (std::abs(g[0]) > 1e-2 * scale + 1e-12) throw SingularInput("dLinv order 3 needs W = O(Y^3)");
    }
    const Field I = ctx.wall_cumint(w, 2, 2);
    const Field& U = ctx.U();
    const Field& U1 = ctx.UY();
    const Field& U2 = ctx.UYY();
    const Field wy = diff(w, 1);
    Field r(ctx.grid());
    if (order == 1) {
        for (std::size_t i = 1; i < r.size(); ++i) r[i] = U2[i] * I[i] + wy[i] / U[i];
    } else if (order == 2) {
        const Field U3 = diff(U2, 1);
        const Field wyy = diff(w, 2);
        for (std::size_t i = 1; i < r.size(); ++i) {
            const double u = U[i];
            r[i] = U3[i] * I[i] + U2[i] * w[i] / (u * u) - U1[i] * wy[i] / (u * u) + wyy[i] / u;
        }
    } else {
        const Field U3 = diff(U2, 1);
        const Field U4 = diff(U2, 2);
        const Field wyy = diff(w, 2);
        const Field wyyy = diff(w, 3);
        for (std::size_t i = 1; i < r.size(); ++i) {
            const double u = U[i], u2 = u * u, u3 = u2 * u;
            r[i] = U4[i] * I[i] + 2.0 * (u * U3[i] - U2[i] * U1[i]) / u3 * w[i] + 2.0 * U1[i] * U1[i] / u3 * wy[i] -
                   2.0 * U1[i] / u2 * wyy[i] + wyyy[i] / u;
        }
    }
    r[0] = extrapolate_to_wall(r);
    return r;
}

}  // namespace goldstein
