#include "goldstein/audit.hpp"

#include "goldstein/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace goldstein {

namespace {

constexpr double kA4 = 1.0 / 48.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string range_text(const char* var, double lo, double hi) {
    std::ostringstream os;
    os.precision(4);
    os << var << " in [" << lo << ", " << hi << "]";
    return os.str();
}

// Folds one checked margin into the report.
void record(AuditReport& r, double margin, double tol) {
    ++r.samples;
    r.worst_margin = std::min(r.worst_margin, margin);
    if (margin < -tol) ++r.violation_count;
}

AuditReport fresh(const std::string& name) {
    AuditReport r;
    r.name = name;
    r.worst_margin = kInf;
    return r;
}

}  // namespace

double AuditTolerance::at(double scale) const { return std::max(10.0 * h2 * std::abs(scale), floor); }

AuditTolerance tolerance_for(const GridPtr& grid) {
    const auto& Y = grid->nodes();
    double h = 0.0;
    for (std::size_t i = 0; i + 1 < Y.size(); ++i) h = std::max(h, (Y[i + 1] - Y[i]) / std::max(Y[i], 1.0));
    return {h * h};
}

RescaledSnapshot rescale_snapshot(const Trajectory& t, const Snapshot& snap,
                                  const std::vector<ModulationState>& history) {
    if (history.empty()) throw MissingInput("empty modulation history");
    VMState st;
    st.x = snap.x;
    st.zeta_grid = t.zeta_grid;
    st.psi_grid = t.psi_grid;
    st.W = snap.W;
    st.x0_pressure = t.x0_pressure;
    st.gradient = t.gradient;
    st.lambda = snap.lambda;

    auto best = std::min_element(history.begin(), history.end(), [&](const auto& p, const auto& q) {
        return std::abs(p.x - snap.x) < std::abs(q.x - snap.x);
    });
    RescaledSnapshot r;
    r.s = best->s;
    r.b = best->b;
    r.btilde = best->btilde;
    r.lambda = snap.lambda;

    const double l = snap.lambda;
    const Field u = from_von_mises(st);
    const Field F = compute_F(st);
    const std::size_t n = u.size();
    std::vector<double> Y(n), U(n), UYY(n), psi(n), W(n);
    for (std::size_t i = 0; i < n; ++i) {
        Y[i] = u.node(i) / l;
        U[i] = u[i] / (l * l);
        UYY[i] = 1.0 + 0.5 * F[i];
        psi[i] = (*t.psi_grid)[i] / (l * l * l);
        W[i] = snap.W[i] / (l * l * l * l);
    }
    const auto ygrid = Grid::from_nodes(std::move(Y));
    const auto pgrid = Grid::from_nodes(std::move(psi));
    r.U = Field(ygrid, std::move(U));
    r.UYY = Field(ygrid, std::move(UYY));
    r.W = Field(pgrid, std::move(W));
    r.F = Field(pgrid, F.values);

    // the stencil is exact on {1, ζ², ζ³}, so the wall cells, wide in relative
    // terms, do not set the truncation error; the outer half does
    const auto& z = t.zeta_grid->nodes();
    double h = 0.0;
    for (std::size_t i = z.size() / 2; i + 1 < z.size(); ++i) h = std::max(h, std::log(z[i + 1] / z[i]));
    r.tol = {h * h};
    return r;
}

AuditReport max_principle_audit(const Field& U, const Field& UYY, double s, double b, double M2, double M1,
                                double c, const AuditTolerance& tol) {
    AuditReport r = fresh("max_principle");
    const double Yc = c * std::cbrt(s);
    r.domain_checked = range_text("Y", 0.0, U.grid->back()) + "; lower bound 1 - M2 b Y^2 on Y <= " +
                       std::to_string(Yc);
    for (std::size_t i = 0; i < UYY.size(); ++i) {
        const double Y = UYY.node(i), v = UYY[i];
        const double t = tol.at(std::max(std::abs(v), 1.0));
        record(r, 1.0 - v, t);
        if (Y <= Yc) record(r, v - (1.0 - M2 * b * Y * Y), t);
        else record(r, v + M1, t);
    }
    return r;
}

AuditReport max_principle_audit(const Field& U, double s, double b, double M2, double c) {
    return max_principle_audit(U, diff(U, 2, 9), s, b, M2, std::max(M2, 1.0), c, tolerance_for(U.grid));
}

double W_minus(double psi, double btilde, double A) {
    return std::pow(6.0 * psi, 4.0 / 3.0) / 4.0 - A * std::pow(psi, 7.0 / 3.0) * std::pow(btilde, 1.25);
}

double W_plus(double psi, double btilde, double A) {
    return std::pow(6.0 * psi, 4.0 / 3.0) / 4.0 + A * std::pow(psi, 10.0 / 3.0) * btilde * btilde;
}

double transport_threshold(double k) {
    const double q = 16.0 * (9.0 * k * k - 9.0 * k + 2.0) / (3.0 * std::pow(6.0, 4.0 / 3.0) * (k - 2.0));
    return 2.0 * std::pow(q, 0.75);
}

double default_C_minus() { return std::max(transport_threshold(7.0 / 3.0), transport_threshold(10.0 / 3.0)); }

ComparisonResiduals comparison_residuals(double psi, double b, double btilde, double A_minus, double A_plus,
                                         double dlog) {
    // derivatives in t = ln ψ on a symmetric stencil
    auto residual = [&](auto&& Wf, double k, double A, double sign, double& scale) {
        const double p = (3.0 * k - 2.0) / 4.0;
        const double wm = Wf(psi * std::exp(-dlog)), w0 = Wf(psi), wp = Wf(psi * std::exp(dlog));
        const double Wt = (wp - wm) / (2.0 * dlog), Wtt = (wp - 2.0 * w0 + wm) / (dlog * dlog);
        const double Wpsi = Wt / psi, Wpp = (Wtt - Wt) / (psi * psi);
        const double Ws = -sign * A * p * b * std::pow(psi, k) * std::pow(btilde, p);
        const double terms[] = {Ws, 2.0 * b * w0, 1.5 * b * psi * Wpsi, std::sqrt(std::max(w0, 0.0)) * Wpp, 2.0};
        scale = 0.0;
        for (double v : terms) scale = std::max(scale, std::abs(v));
        return terms[0] - terms[1] + terms[2] - terms[3] + terms[4];
    };
    ComparisonResiduals out;
    out.sub = residual([&](double q) { return W_minus(q, btilde, A_minus); }, 7.0 / 3.0, A_minus, -1.0,
                       out.scale_sub);
    out.super = residual([&](double q) { return W_plus(q, btilde, A_plus); }, 10.0 / 3.0, A_plus, 1.0,
                         out.scale_super);
    return out;
}

AuditReport subsolution_audit(const Field& W, double s, double b, double btilde, double A_minus, double A_plus,
                              double C_minus, const AuditTolerance& tol) {
    (void)s;
    AuditReport r = fresh("sub_super_solution");
    const double lo = C_minus * std::pow(btilde, -0.75), hi = W.grid->back();
    r.domain_checked = range_text("psi", lo, hi);
    for (std::size_t i = 0; i < W.size(); ++i) {
        const double psi = W.node(i);
        if (psi < lo) continue;
        const double t = tol.at(W[i]);
        record(r, W_plus(psi, btilde, A_plus) - W[i], t);
        const double wm = W_minus(psi, btilde, A_minus);
        if (wm > 0.0) record(r, W[i] - wm, t);
    }
    if (!(hi > lo)) return r;

    constexpr double dlog = 1e-3;
    const AuditTolerance fd{dlog * dlog};
    constexpr int n = 200;
    for (int j = 0; j <= n; ++j) {
        const double psi = lo * std::pow(hi / lo, static_cast<double>(j) / n);
        const auto c = comparison_residuals(psi, b, btilde, A_minus, A_plus, dlog);
        record(r, c.super, fd.at(c.scale_super));
        if (W_minus(psi * std::exp(-dlog), btilde, A_minus) > 0.0 && W_minus(psi * std::exp(dlog), btilde, A_minus) > 0.0)
            record(r, -c.sub, fd.at(c.scale_sub));
    }
    return r;
}

double calibrate_dyadic(const std::function<bool(double)>& passes) {
    for (int k = -40; k <= 40; ++k) {
        const double A = std::ldexp(1.0, k);
        if (passes(A)) return A;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

ExpansionCheck expansion_check(const Field& W, double s, double b, double a) {
    ExpansionCheck e;
    const double centre = std::pow(s, 0.75);
    e.correction_ratio = kInf;
    for (std::size_t i = 0; i < W.size(); ++i) {
        const double psi = W.node(i);
        if (psi < 0.5 * centre || psi > 2.0 * centre) continue;
        const double z = std::pow(6.0 * psi, 2.0 / 3.0);
        const double W0 = z * z / 4.0;
        const double corr1 = 2.0 / z, corr2 = 2.4 * kA4 * b * z;
        const double rem = std::cbrt(psi) / s + std::pow(s, -13.0 / 8.0) * std::pow(psi, (7.0 + a) / 6.0) + 1.0 / psi;
        e.max_ratio = std::max(e.max_ratio, std::abs(W[i] / W0 - (1.0 + corr1 - corr2)) / rem);
        e.correction_ratio = std::min(e.correction_ratio, (corr1 + corr2) / rem);
        ++e.samples;
    }
    if (e.samples == 0) e.correction_ratio = 0.0;
    return e;
}

AuditReport F_bound_audit(const Field& F, double s, double btilde, double alpha, double C_minus, double c,
                          const AuditTolerance& tol) {
    (void)s;
    AuditReport r = fresh("F_bounds");
    const double lo = C_minus * std::pow(btilde, -0.75), hi = c * std::pow(btilde, -1.25);
    r.domain_checked = "F <= 0 on all nodes; lower envelope on " + range_text("psi", lo, std::min(hi, F.grid->back()));
    for (std::size_t i = 0; i < F.size(); ++i) {
        const double psi = F.node(i);
        const double t = tol.at(2.0);
        record(r, -F[i], t);
        if (psi >= lo && psi <= hi)
            record(r, F[i] + btilde * alpha * (std::pow(psi, 2.0 / 3.0) - std::cbrt(psi)), t);
    }
    return r;
}

double F_floor_alpha(double M0) { return std::max(std::pow(6.0, 2.0 / 3.0), 12.0 * M0); }

double initial_M0(const Field& UYY, double s0, const AuditTolerance& tol) {
    double M0 = 0.0;
    for (std::size_t i = 1; i < UYY.size(); ++i) {
        const double Y = UYY.node(i);
        const double gap = 1.0 - UYY[i] - tol.at(std::max(std::abs(UYY[i]), 1.0));
        M0 = std::max(M0, gap / std::min(Y * Y / s0, 1.0));
    }
    return M0;
}

double hardy_phi(double r, double a, double mu) {
    if (!(r > 0.0) || a < 0.0 || !(mu > 0.0)) throw DomainError("need r > 0, a >= 0, mu > 0");
    boost::math::quadrature::exp_sinh<double> outer;
    boost::math::quadrature::tanh_sinh<double> inner;
    double e1 = 0.0, e2 = 0.0, l1 = 0.0;
    const double I1 = outer.integrate(
        [&](double Y) {
            const double q = mu * Y + 0.5 * Y * Y;
            return std::pow(Y, -a) / (q * q);
        },
        r, kInf, 1e-13, &e1, &l1);
    const double I2 = inner.integrate([&](double Y) { return std::pow(Y, a) * (Y + 0.5 * Y * Y); }, 0.0, r, 1e-13,
                                      &e2, &l1);
    if (!(e1 <= 1e-9 * std::abs(I1)) || !(e2 <= 1e-9 * std::abs(I2)))
        throw PrecisionError("quadrature for phi did not converge at r = " + std::to_string(r));
    return I1 * I2;
}

double hardy_phi_closed(double r, double mu) {
    // ln(r/(2μ + r)) through log1p; the bracket is O(r^{-3}) at large r
    const double q = 2.0 * mu + r;
    return (-std::log1p(2.0 * mu / r) / mu + 1.0 / r + 1.0 / q) * (r * r / 2.0 + r * r * r / 6.0) / (mu * mu);
}

double hardy_constant(double a, double mu, double r_max, std::size_t n) {
    if (a < 0.0 || !(mu > 0.0) || mu > 1.0) throw DomainError("need a >= 0 and mu in (0, 1]");
    if (n < 2 || !(r_max > 1e-3)) throw DomainError("need n >= 2 and r_max > 1e-3");
    const double lr0 = std::log(1e-3), lr1 = std::log(r_max);
    std::size_t best = 0;
    double best_val = -kInf;
    std::vector<double> lr(n);
    for (std::size_t j = 0; j < n; ++j) {
        lr[j] = lr0 + (lr1 - lr0) * static_cast<double>(j) / (n - 1);
        const double v = hardy_phi(std::exp(lr[j]), a, mu);
        if (v > best_val) {
            best_val = v;
            best = j;
        }
    }
    if (best > 0 && best + 1 < n) {
        const auto [t, v] = boost::math::tools::brent_find_minima(
            [&](double l) { return -hardy_phi(std::exp(l), a, mu); }, lr[best - 1], lr[best + 1], 40);
        best_val = std::max(best_val, -v);
    }
    const double cap = 2.0 / ((3.0 + a) * (3.0 + a)) + 4.0 / ((2.0 + a) * (3.0 + a) * r_max);
    return 4.0 * std::max(best_val, cap);
}

HardyGeneral hardy_general(const std::function<double(double)>& p1, const std::function<double(double)>& p2,
                           double R, std::size_t n) {
    if (!(R > 0.0) || n < 4) throw DomainError("need R > 0 and n >= 4");
    boost::math::quadrature::tanh_sinh<double> ts;
    HardyGeneral out;
    auto inv = [&](double t) { return 1.0 / p2(t); };
    auto lower = [&](double r, bool& bad) {
        double err = 0.0, l1 = 0.0;
        try {
            const double I = ts.integrate(inv, 0.0, r, 1e-10, &err, &l1);
            if (!std::isfinite(I) || err > 1e-6 * std::abs(I)) bad = true;
            return I;
        } catch (const std::exception&) {
            bad = true;
            return kInf;
        }
    };
    auto upper = [&](double r) {
        double err = 0.0, l1 = 0.0;
        return ts.integrate(p1, r, R, 1e-10, &err, &l1);
    };
    bool bad = false;
    lower(R * 1e-6, bad);
    if (bad) {
        out.infinite = true;
        out.value = kInf;
        return out;
    }
    auto phi = [&](double r) {
        bool b = false;
        return upper(r) * lower(r, b);
    };
    // log-spaced near 0 and uniform across (0, R)
    std::vector<double> rs;
    for (std::size_t j = 0; j < n; ++j) rs.push_back(R * std::pow(10.0, -6.0 + 6.0 * static_cast<double>(j) / n));
    for (std::size_t j = 1; j < n; ++j) rs.push_back(R * static_cast<double>(j) / n);
    std::sort(rs.begin(), rs.end());
    std::size_t best = 0;
    double best_val = -kInf;
    for (std::size_t j = 0; j < rs.size(); ++j) {
        const double v = phi(rs[j]);
        if (v > best_val) {
            best_val = v;
            best = j;
        }
    }
    out.r_at_sup = rs[best];
    if (best > 0 && best + 1 < rs.size()) {
        const auto [r, v] = boost::math::tools::brent_find_minima([&](double q) { return -phi(q); }, rs[best - 1],
                                                                  rs[best + 1], 40);
        if (-v > best_val) {
            best_val = -v;
            out.r_at_sup = r;
        }
    }
    out.value = 4.0 * best_val;
    return out;
}

FrozenConstants calibrate_constants(const RescaledSnapshot& r) {
    FrozenConstants k;
    k.C_minus = default_C_minus();
    k.M2 = calibrate_dyadic(
        [&](double M) { return max_principle_audit(r.U, r.UYY, r.s, r.b, M, 1e300, k.c, r.tol).pass(); });
    k.M1 = calibrate_dyadic(
        [&](double M) { return max_principle_audit(r.U, r.UYY, r.s, r.b, k.M2, M, k.c, r.tol).pass(); });
    k.A_minus = calibrate_dyadic(
        [&](double A) { return subsolution_audit(r.W, r.s, r.b, r.btilde, A, 1e300, k.C_minus, r.tol).pass(); });
    k.A_plus = calibrate_dyadic([&](double A) {
        return subsolution_audit(r.W, r.s, r.b, r.btilde, k.A_minus, A, k.C_minus, r.tol).pass();
    });
    k.M0 = initial_M0(r.UYY, r.s, r.tol);
    k.alpha = F_floor_alpha(k.M0);
    return k;
}

nlohmann::json audit_json(const std::vector<AuditReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports)
        arr.push_back({{"name", r.name},
                       {"domain_checked", r.domain_checked},
                       {"worst_margin", std::isfinite(r.worst_margin) ? nlohmann::json(r.worst_margin) : nlohmann::json()},
                       {"violation_count", r.violation_count},
                       {"samples", r.samples},
                       {"pass", r.pass()}});
    return arr;
}

}  // namespace goldstein
