#pragma once

#include "goldstein/grid.hpp"
#include "goldstein/von_mises.hpp"

#include "json.hpp"

#include <cstddef>
#include <vector>

namespace goldstein {

struct ModulationState {
    double x = 0.0;
    double s = 0.0;
    double lambda = 0.0;
    double b = 0.0;       ///< -2 λ_x λ³
    double btilde = 0.0;  ///< b̃_s + b b̃ = 0, b̃(s0) = 1/s0
};

/// tanh-clustered Y grid on [0, 8 s^{2/7}].
GridPtr standard_rescaled_grid(double s, std::size_t n = 2000);

/// U(Y) = u(λY)/λ² on the target grid. Throws InconsistentLambda if
/// |U_Y(0) - 1| > 1e-2.
Field rescale_profile(const Field& u, double lambda, GridPtr target);
Field rescale_profile(const Field& u, double lambda, double s);

/// s_k = s0 + ∫ λ⁻⁴ dx by the trapezoid rule.
std::vector<double> accumulate_s(const std::vector<double>& x, const std::vector<double>& lambda, double s0);

/// Least-squares slope df/dt over a window of 2*half+1 samples, shifted
/// inward at the ends.
std::vector<double> lsq_slope(const std::vector<double>& t, const std::vector<double>& f, std::size_t half = 2);

/// b = -2 λ_x λ³ with λ_x from a 5-sample least-squares slope.
std::vector<double> compute_b(const std::vector<double>& x, const std::vector<double>& lambda);

/// b̃(s) = exp(-∫_{s0}^s b)/s0, integral by the trapezoid rule.
std::vector<double> evolve_btilde(const std::vector<double>& s, const std::vector<double>& b);

std::vector<ModulationState> modulation_history(const Trajectory& t);

struct SingularityFit {
    double x_star = 0.0;
    double C = 0.0;
    double exponent = 0.0;
    double residual = 0.0;  ///< rms of log λ - log C - p log(x* - x)
    std::size_t count = 0;
};

/// Fits log λ = log C + p log(x* - x). Needs at least 30 samples covering
/// a decade in λ; throws FitFailure otherwise or when x* sits on the
/// search bracket.
SingularityFit fit_singularity(const std::vector<double>& x, const std::vector<double>& lambda);

struct FitWindow {
    std::size_t first = 0, last = 0;  ///< half-open
};

/// The last decade of λ above 3 λ_stop, leaving out the final exclude_tail
/// samples of the trajectory.
FitWindow default_fit_window(const std::vector<double>& lambda, double lambda_stop, std::size_t exclude_tail = 10);

struct LemmaBReport {
    double gamma = 0.0, eta = 0.0;
    double s_start = 0.0;
    double epsilon = 0.0;     ///< max |b s - 1| on [s_start, s_end]
    bool envelope_ok = false; ///< epsilon < 1
    double J = 0.0;           ///< ∫ s^γ (b_s + b²)²
    std::size_t checked = 0;
    std::size_t violations = 0;       ///< general form
    std::size_t violations_eta = 0;   ///< s^{-1-η} form
    double worst_ratio = 0.0;         ///< max lhs/rhs, general form
};

/// Checks |b - 1/s| against the two bounds of the ODE lemma on samples
/// with s ≥ s_start (s_start = s[0] when not positive).
LemmaBReport lemma_b_certificate(const std::vector<double>& s, const std::vector<double>& b, double gamma, double eta,
                                 double s_start = 0.0);

/// ∫ s^γ (b_s + b²)² over samples with s ≥ s_start, with b_s from lsq_slope.
double weighted_defect_integral(const std::vector<double>& s, const std::vector<double>& b, double gamma,
                                double s_start = 0.0);

nlohmann::json fit_report_json(const SingularityFit& fit, const FitWindow& window, const LemmaBReport& lemma,
                               double b_envelope);

}  // namespace goldstein
