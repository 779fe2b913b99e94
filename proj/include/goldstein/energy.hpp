#pragma once

#include "goldstein/grid.hpp"
#include "goldstein/prandtl_ops.hpp"

#include <filesystem>
#include <vector>

namespace goldstein {

/// w(s,Y) = Y^{-a} (1 + s^{-β} Y)^{-m}.
struct WeightSpec {
    double a = 0.05;
    double beta = 0.2508;
    int m = 40;
};

/// Weights for the three energy levels. β1, β2 must satisfy
/// 1/4 < β2 < β1 < inf(11/(11-a), (14-a)/(14-2a))/4, and η < (3-a)(β1 - 1/4).
struct WeightSet {
    WeightSpec w0{0.05, 0.27, 20};
    WeightSpec w1{0.05, 0.2508, 40};
    WeightSpec w2{0.05, 0.2504, 80};
    double eta = 0.002;

    /// Throws ConfigError when the ordering constraints fail.
    void validate() const;
    const WeightSpec& level(int k) const { return k == 0 ? w0 : (k == 1 ? w1 : w2); }
};

/// Pointwise weight; +inf at Y = 0 when a > 0.
Field weight_eval(const WeightSpec& spec, double s, GridPtr grid);

/// ∫ g w over the grid: Y^{-a} integrated exactly against the piecewise-linear
/// interpolant of g (1 + s^{-β}Y)^{-m}.
double weighted_integral(const Field& g, const WeightSpec& spec, double s);

/// Crude bound on ∫_{Y_max}^∞ g w, taking |g| ≤ |g(Y_max)| beyond the grid.
double weighted_tail_bound(const Field& g, const WeightSpec& spec, double s);

/// V = U - U^app(s, b).
Field compute_V(const Field& U, double s, double b);

/// Least-squares fit V ≈ c7 Y^7 + c8 Y^8 on [Y_lo, Y_hi].
struct WallFit {
    double c7 = 0.0, c8 = 0.0;
};
WallFit fit_wall_Y7(const Field& V, double Y_lo, double Y_hi);

/// ∂_Y² 𝓛_U^k V, k = 0, 1, 2.
Field energy_density(int k, const OperatorContext& ctx, const Field& V);

/// ∫ (∂_Y² 𝓛_U^k V)² w.
double energy(int k, const OperatorContext& ctx, const Field& V, const WeightSpec& spec, double s);

/// ∫ (∂_Y³ 𝓛_U^k V)²/U w + ∫ (∂_Y² 𝓛_U^k V)²/U² w. At Y = 0 the integrands
/// take their value at the first interior node.
double dissipation(int k, const OperatorContext& ctx, const Field& V, const WeightSpec& spec, double s);

struct TraceResult {
    double value = 0.0;     ///< ∂_Y 𝓛_U² V at Y = 0
    double target = 0.0;    ///< -(b_s + b²)/2
    double residual = 0.0;  ///< value - target
    bool low_confidence = false;
};

/// Wall value of ∂_Y 𝓛_U² V by a quadratic least-squares fit over nodes 2..6.
TraceResult trace_check(const OperatorContext& ctx, const Field& V, double b, double bs);

struct TraceAudit {
    double lhs = 0.0, rhs = 0.0;
    bool holds = false;
};

/// |f(0)|² against C̄ (L^{1+a} ∫_0^L f_Y² Y^{-a} + L^{a-3} ∫_0^L f² (Y + Y²) Y^{-a}).
TraceAudit trace_inequality_audit(const Field& f, double L, double a, double Cbar = 8.0);

/// Best constant in the inequality above as L → ∞ (the worst case for L ≥ 1),
/// from a piecewise-linear minimisation on [0, 1] with n cells.
double trace_constant_sharp(double a, std::size_t n = 4000);

struct CoercivityAudit {
    double lhs = 0.0;                  ///< -∫ (∂_YY L_U^{-1} f) f w
    double diffusion_quadratic = 0.0;  ///< ∫ f_Y²/U w + ∫ f²/U² w
    double damping = 0.0;              ///< δ b ∫ f² w
    double tail = 0.0;                 ///< dropped tail term of the lemma, C = 1, c = 1
    double margin = 0.0;               ///< lhs - (c̄ diffusion_quadratic - damping)
    bool holds_with_margin = false;
};

/// Needs f = O(Y²) at the wall so that L_U^{-1} f is defined.
CoercivityAudit coercivity_audit(const OperatorContext& ctx, const Field& f, const WeightSpec& spec, double s,
                                 double b, double cbar = 1.0 / 50.0, double delta = 0.1);

struct EnergyReport {
    double s = 0.0;
    double E0 = 0.0, E1 = 0.0, E2 = 0.0;
    double D0 = 0.0, D1 = 0.0, D2 = 0.0;
    double trace_residual = 0.0;
    double bs_plus_b2 = 0.0;
    bool resolved = true;
};

/// All energies, dissipations and the trace residual for one rescaled profile.
/// When an operator rejects V the sample is marked unresolved and the
/// quantities not reached are NaN.
EnergyReport energy_report(const OperatorContext& ctx, const Field& V, double s, double b, double bs,
                           const WeightSet& weights);

/// Rescales the physical profile u onto standard grids of n and 2n nodes and
/// reports the coarse values; resolved only if every E_k agrees within 10%.
EnergyReport energy_sample(const Field& u, double lambda, double s, double b, double bs, const WeightSet& weights,
                           std::size_t n = 2000);

/// Smallest K with |U - (Y + Y²/2 - a4 b Y⁴)| ≤ K s^{-13/8} Y^{(9+a)/2} (1 + Y) on 0 < Y ≤ s^{1/4}.
double approx_profile_constant(const Field& U, double s, double b, double a);

/// Columns s,E0,E1,E2,D0,D1,D2,trace_residual,bs_plus_b2,resolved_flag.
void write_energy_csv(const std::vector<EnergyReport>& rows, const std::filesystem::path& path);

}  // namespace goldstein
