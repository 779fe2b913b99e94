#include "goldstein/rescaled.hpp"

#include "goldstein/errors.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace goldstein {

GridPtr standard_rescaled_grid(double s, std::size_t n) {
    if (!(s > 0.0)) throw DomainError("s must be positive");
    return Grid::tanh_clustered(8.0 * std::pow(s, 2.0 / 7.0), n);
}

Field rescale_profile(const Field& u, double lambda, GridPtr target) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    // Node positions and values are both smooth in the node index, so quintic
    // splines in the index give a C^4 interpolant; the energies take up to six
    // derivatives of the result.
    const double y_end = lambda * target->back();
    if (y_end > u.grid->back()) throw ExtrapolationError("rescaled grid extends past the profile");
    const auto& yn = u.grid->nodes();
    const std::size_t stop = std::min(yn.size(), u.grid->locate(y_end) + 8);
    using Spline = boost::math::interpolators::cardinal_quintic_b_spline<double>;
    const Spline ys(yn.data(), stop, 0.0, 1.0), us(u.values.data(), stop, 0.0, 1.0);
    std::vector<double> vals(target->size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double y = lambda * (*target)[i];
        const std::size_t c = u.grid->locate(y);
        double t = static_cast<double>(c) + (y - yn[c]) / (yn[c + 1] - yn[c]);
        for (int it = 0; it < 20; ++it) {
            const double dt = (ys(t) - y) / ys.prime(t);
            t = std::clamp(t - dt, static_cast<double>(c), static_cast<double>(c + 1));
            if (std::abs(dt) < 1e-14) break;
        }
        vals[i] = us(t) / (lambda * lambda);
    }
    Field U(target, std::move(vals));
    U[0] = 0.0;
    const auto& Y = target->nodes();
    const auto w = fd_weights(0.0, std::span<const double>(Y.data(), 5), 1);
    double slope = 0.0;
    for (int j = 0; j < 5; ++j) slope += w[1][j] * U[j];
    if (std::abs(slope - 1.0) > 1e-2)
        throw InconsistentLambda("rescaled wall slope " + std::to_string(slope) + " differs from 1");
    return U;
}

Field rescale_profile(const Field& u, double lambda, double s) {
    return rescale_profile(u, lambda, standard_rescaled_grid(s));
}

std::vector<double> accumulate_s(const std::vector<double>& x, const std::vector<double>& lambda, double s0) {
    std::vector<double> s(x.size());
    if (x.empty()) return s;
    s[0] = s0;
    for (std::size_t k = 1; k < x.size(); ++k)
        s[k] = s[k - 1] + 0.5 * (x[k] - x[k - 1]) * (std::pow(lambda[k], -4) + std::pow(lambda[k - 1], -4));
    return s;
}

std::vector<double> lsq_slope(const std::vector<double>& t, const std::vector<double>& f, std::size_t half) {
    const std::size_t n = t.size(), width = 2 * half + 1;
    if (n < width) throw TooFewNodes("need at least " + std::to_string(width) + " samples");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = std::min(k > half ? k - half : 0, n - width);
        double tm = 0.0, fm = 0.0;
        for (std::size_t j = lo; j < lo + width; ++j) {
            tm += t[j];
            fm += f[j];
        }
        tm /= width;
        fm /= width;
        double num = 0.0, den = 0.0;
        for (std::size_t j = lo; j < lo + width; ++j) {
            num += (t[j] - tm) * (f[j] - fm);
            den += (t[j] - tm) * (t[j] - tm);
        }
        out[k] = num / den;
    }
    return out;
}

std::vector<double> compute_b(const std::vector<double>& x, const std::vector<double>& lambda) {
    auto b = lsq_slope(x, lambda, 2);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] *= -2.0 * std::pow(lambda[k], 3);
    return b;
}

std::vector<double> evolve_btilde(const std::vector<double>& s, const std::vector<double>& b) {
    std::vector<double> bt(s.size());
    if (s.empty()) return bt;
    double integral = 0.0;
    bt[0] = 1.0 / s[0];
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (!(s[k] > s[k - 1])) throw DomainError("s must be increasing");
        integral += 0.5 * (s[k] - s[k - 1]) * (b[k] + b[k - 1]);
        bt[k] = std::exp(-integral) / s[0];
    }
    return bt;
}

std::vector<ModulationState> modulation_history(const Trajectory& t) {
    std::vector<double> x, lam;
    for (const auto& p : t.samples) {
        x.push_back(p.x);
        lam.push_back(p.lambda);
    }
    const auto s = accumulate_s(x, lam, t.s0);
    const auto b = compute_b(x, lam);
    const auto bt = evolve_btilde(s, b);
    std::vector<ModulationState> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = {x[k], s[k], lam[k], b[k], bt[k]};
    return out;
}

namespace {

struct LineFit {
    double intercept = 0.0, slope = 0.0, ssr = 0.0;
};

LineFit fit_line(const std::vector<double>& a, const std::vector<double>& f) {
    const double n = static_cast<double>(a.size());
    double am = 0.0, fm = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        am += a[i];
        fm += f[i];
    }
    am /= n;
    fm /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - am) * (f[i] - fm);
        den += (a[i] - am) * (a[i] - am);
    }
    LineFit r;
    r.slope = num / den;
    r.intercept = fm - r.slope * am;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = f[i] - r.intercept - r.slope * a[i];
        r.ssr += e * e;
    }
    return r;
}

}  // namespace

SingularityFit fit_singularity(const std::vector<double>& x, const std::vector<double>& lambda) {
    const std::size_t n = x.size();
    if (n < 30) throw FitFailure("fit needs at least 30 samples, got " + std::to_string(n));
    const auto [lmin, lmax] = std::minmax_element(lambda.begin(), lambda.end());
    if (!(*lmin > 0.0) || *lmax / *lmin < 10.0) throw FitFailure("fit window spans less than a decade in lambda");

    std::vector<double> logl(n), a(n);
    for (std::size_t i = 0; i < n; ++i) logl[i] = std::log(lambda[i]);
    const double x_last = x.back(), span = x.back() - x.front();
    // x* = x_last + e^t
    auto ssr = [&](double t) {
        const double xs = x_last + std::exp(t);
        for (std::size_t i = 0; i < n; ++i) a[i] = std::log(xs - x[i]);
        return fit_line(a, logl).ssr;
    };
    const double t_lo = std::log(1e-8 * span), t_hi = std::log(10.0 * span);
    const auto [t_best, best] = boost::math::tools::brent_find_minima(ssr, t_lo, t_hi, 50);
    if (t_best - t_lo < 1e-3 || t_hi - t_best < 1e-3)
        throw FitFailure("x* on the search bracket (offset " + std::to_string(std::exp(t_best)) + ", ssr " +
                         std::to_string(best) + ")");

    SingularityFit f;
    f.x_star = x_last + std::exp(t_best);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::log(f.x_star - x[i]);
    const auto line = fit_line(a, logl);
    f.C = std::exp(line.intercept);
    f.exponent = line.slope;
    f.residual = std::sqrt(line.ssr / static_cast<double>(n));
    f.count = n;
    return f;
}

FitWindow default_fit_window(const std::vector<double>& lambda, double lambda_stop, std::size_t exclude_tail) {
    // endpoints are the last sample at or above 30 λ_stop and the first at or
    // below 3 λ_stop, so the window covers the whole decade
    FitWindow w;
    const std::size_t end = lambda.size() > exclude_tail ? lambda.size() - exclude_tail : 0;
    std::size_t k = 0;
    while (k < end && lambda[k] >= 30.0 * lambda_stop) ++k;
    w.first = k > 0 ? k - 1 : 0;
    while (k < end && lambda[k] > 3.0 * lambda_stop) ++k;
    w.last = std::min(k + 1, end);
    return w;
}

double weighted_defect_integral(const std::vector<double>& s, const std::vector<double>& b, double gamma,
                                double s_start) {
    const auto bs = lsq_slope(s, b, 2);
    double J = 0.0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s[k - 1] < s_start) continue;
        const double d0 = bs[k - 1] + b[k - 1] * b[k - 1], d1 = bs[k] + b[k] * b[k];
        J += 0.5 * (s[k] - s[k - 1]) * (std::pow(s[k - 1], gamma) * d0 * d0 + std::pow(s[k], gamma) * d1 * d1);
    }
    return J;
}

LemmaBReport lemma_b_certificate(const std::vector<double>& s, const std::vector<double>& b, double gamma, double eta,
                                 double s_start) {
    LemmaBReport r;
    r.gamma = gamma;
    r.eta = eta;
    if (s.empty()) return r;
    if (!(s_start > 0.0)) s_start = s.front();
    std::size_t k0 = 0;
    while (k0 < s.size() && s[k0] < s_start) ++k0;
    if (k0 == s.size()) return r;
    r.s_start = s[k0];
    for (std::size_t k = k0; k < s.size(); ++k) r.epsilon = std::max(r.epsilon, std::abs(b[k] * s[k] - 1.0));
    r.envelope_ok = r.epsilon < 1.0;
    r.J = weighted_defect_integral(s, b, gamma, r.s_start);
    if (!r.envelope_ok) return r;

    const double e = r.epsilon, s0 = s[k0];
    const double first = (1.0 + e) / (1.0 - e) * std::abs(1.0 / s0 - b[k0]) * s0 * s0;
    const double c_gen = (1.0 + e) / ((1.0 - e) * (1.0 - e) * std::sqrt(5.0 - gamma)) * std::sqrt(r.J);
    const double c_eta = (1.0 + e) * std::sqrt(r.J) / ((1.0 - e) * (1.0 - e) * std::sqrt(2.0 - 2.0 * eta));
    for (std::size_t k = k0; k < s.size(); ++k) {
        const double lhs = std::abs(b[k] - 1.0 / s[k]);
        const double rhs = first / (s[k] * s[k]) + c_gen * std::pow(s[k], 0.5 * (1.0 - gamma));
        const double rhs_eta = first / (s[k] * s[k]) + c_eta * std::pow(s[k], -1.0 - eta);
        ++r.checked;
        if (lhs > rhs) ++r.violations;
        if (lhs > rhs_eta) ++r.violations_eta;
        if (rhs > 0.0) r.worst_ratio = std::max(r.worst_ratio, lhs / rhs);
        else if (lhs > 0.0) r.worst_ratio = std::numeric_limits<double>::infinity();
    }
    return r;
}

nlohmann::json fit_report_json(const SingularityFit& fit, const FitWindow& window, const LemmaBReport& lemma,
                               double b_envelope) {
    return {
        {"x_star", fit.x_star},
        {"C", fit.C},
        {"exponent", fit.exponent},
        {"residual", fit.residual},
        {"window", {{"first", window.first}, {"last", window.last}, {"count", fit.count}}},
        {"J_gamma",
         {{"gamma", lemma.gamma},
          {"s_start", lemma.s_start},
          {"J", lemma.J},
          {"epsilon", lemma.epsilon},
          {"checked", lemma.checked},
          {"violations", lemma.violations},
          {"violations_eta", lemma.violations_eta},
          {"worst_ratio", lemma.worst_ratio}}},
        {"b_envelope", b_envelope},
    };
}

}  // namespace goldstein
