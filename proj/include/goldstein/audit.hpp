#pragma once

#include "goldstein/grid.hpp"
#include "goldstein/rescaled.hpp"
#include "goldstein/von_mises.hpp"

#include "json.hpp"

#include <functional>
#include <string>
#include <vector>

namespace goldstein {

struct AuditReport {
    std::string name;
    std::string domain_checked;
    double worst_margin = 0.0;  ///< smallest slack over the checked points, tolerance excluded
    long violation_count = 0;
    long samples = 0;

    bool pass() const { return violation_count == 0 && samples > 0; }
};

/// Discretization-aware slack: max(10 h² scale, floor).
struct AuditTolerance {
    double h2 = 0.0;
    double floor = 1e-10;
    double at(double scale) const;
};

/// h² from the widest relative cell of a grid, Δ/max(Y, 1).
AuditTolerance tolerance_for(const GridPtr& grid);

/// A solver snapshot in rescaled variables. Y = y/λ, U = u/λ², ψ = φ/λ³, W = W/λ⁴;
/// U_YY - 1 = F/2 with F = √W W_ψψ - 2, which is the same in both scalings.
struct RescaledSnapshot {
    double s = 0.0, b = 0.0, btilde = 0.0, lambda = 0.0;
    Field U;    ///< over Y
    Field UYY;  ///< over the same Y nodes
    Field W;    ///< over ψ
    Field F;    ///< over ψ
    AuditTolerance tol;  ///< h = largest log-spacing over the outer half of the ζ grid
};

/// Uses the modulation sample with the snapshot's x.
RescaledSnapshot rescale_snapshot(const Trajectory& t, const Snapshot& snap,
                                  const std::vector<ModulationState>& history);

/// U_YY ≤ 1 everywhere, U_YY ≥ 1 - M2 b Y² on Y ≤ c s^{1/3}, U_YY ≥ -M1 beyond.
AuditReport max_principle_audit(const Field& U, const Field& UYY, double s, double b, double M2, double M1,
                                double c, const AuditTolerance& tol);
/// Same with U_YY taken by nine-point differences and M1 = max(M2, 1).
AuditReport max_principle_audit(const Field& U, double s, double b, double M2, double c);

/// W_± = (6ψ)^{4/3}/4 ± A ψ^k b̃^{(3k-2)/4}, k = 7/3 below and 10/3 above.
double W_minus(double psi, double btilde, double A);
double W_plus(double psi, double btilde, double A);

/// C_k = 2 (16(9k² - 9k + 2) / (3·6^{4/3}(k - 2)))^{3/4}.
double transport_threshold(double k);
/// max(C_{7/3}, C_{10/3}).
double default_C_minus();

/// W_- ≤ W ≤ W_+ on ψ ≥ C_- b̃^{-3/4} (lower bound only where W_- > 0), and the
/// differential inequalities for W_± on a log-spaced ψ sample up to the grid end.
AuditReport subsolution_audit(const Field& W, double s, double b, double btilde, double A_minus, double A_plus,
                              double C_minus, const AuditTolerance& tol);

struct ComparisonResiduals {
    double sub = 0.0;    ///< ∂_s W_- - 2bW_- + (3b/2)ψ ∂_ψW_- - √W_- ∂_ψψW_- + 2, must be ≤ 0
    double super = 0.0;  ///< the same for W_+, must be ≥ 0
    double scale_sub = 0.0, scale_super = 0.0;  ///< largest term in each
};

/// ψ-derivatives by centered differences with log step dlog; ∂_s through b̃_s = -b b̃.
ComparisonResiduals comparison_residuals(double psi, double b, double btilde, double A_minus, double A_plus,
                                         double dlog = 1e-3);

/// Smallest 2^k, k ∈ [-40, 40], for which `passes` holds; NaN if none does.
double calibrate_dyadic(const std::function<bool(double)>& passes);

struct ExpansionCheck {
    double max_ratio = 0.0;       ///< |W/W_0 - (1 + 2(6ψ)^{-2/3} - (12/5)a4 b (6ψ)^{2/3})| / remainder
    double correction_ratio = 0.0;  ///< size of the two kept corrections / remainder
    long samples = 0;
};

/// On ψ ∈ [s^{3/4}/2, 2 s^{3/4}], remainder = s^{-1}ψ^{1/3} + s^{-13/8}ψ^{(7+a)/6} + ψ^{-1}.
ExpansionCheck expansion_check(const Field& W, double s, double b, double a = 0.05);

/// F ≥ -b̃α(ψ^{2/3} - ψ^{1/3}) on [C_- b̃^{-3/4}, c b̃^{-5/4}] and F ≤ 0 everywhere.
AuditReport F_bound_audit(const Field& F, double s, double btilde, double alpha, double C_minus, double c,
                          const AuditTolerance& tol);

/// max(6^{2/3}, 12 M0).
double F_floor_alpha(double M0);

/// Largest (1 - U_YY - tol)/min(Y²/s0, 1) over the profile.
double initial_M0(const Field& UYY, double s0, const AuditTolerance& tol);

/// φ(r, a, μ) = (∫_r^∞ Y^{-a}(μY + Y²/2)^{-2}) (∫_0^r Y^a (Y + Y²/2)) by adaptive quadrature.
double hardy_phi(double r, double a, double mu);
/// Closed form of φ(r, 0, μ).
double hardy_phi_closed(double r, double mu);

/// 4 sup_r φ(r, a, μ) over n log-spaced r in [1e-3, r_max], refined around the
/// best node, and capped from above beyond r_max by 2/(3+a)² + 4/((2+a)(3+a) r_max).
double hardy_constant(double a, double mu, double r_max = 1e4, std::size_t n = 400);

struct HardyGeneral {
    double value = 0.0;
    double r_at_sup = 0.0;
    bool infinite = false;
};

/// C_H = 4 sup_{0<r<R} (∫_r^R p1)(∫_0^r 1/p2).
HardyGeneral hardy_general(const std::function<double(double)>& p1, const std::function<double(double)>& p2,
                           double R, std::size_t n = 200);

/// Constants of the max-principle, comparison and F audits, fixed at the first
/// snapshot and reused unchanged afterwards.
struct FrozenConstants {
    double M2 = 0.0, M1 = 0.0, A_minus = 0.0, A_plus = 0.0;
    double C_minus = 0.0, M0 = 0.0, alpha = 0.0;
    double c = 1.0;
};

/// M2, M1, A_-, A_+ by calibrate_dyadic on `first`; C_- = default_C_minus().
FrozenConstants calibrate_constants(const RescaledSnapshot& first);

nlohmann::json audit_json(const std::vector<AuditReport>& reports);

}  // namespace goldstein
