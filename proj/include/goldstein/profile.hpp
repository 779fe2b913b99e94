#pragma once

#include "goldstein/grid.hpp"

#include <filesystem>

namespace goldstein {

/// Far-field blend: Θ(ξ) = ξ²/2 for ξ ≤ c0, then Θ' = c0 (1 + κt) e^{-μt}
/// with t = ξ - c0, κ = μ + 2 and μ fixed by Θ(∞) = 1. Requires c0 = 0.5.
struct Theta {
    double c0 = 0.5;
    double mu() const;
    double value(double xi) const;
    double d1(double xi) const;
    double d2(double xi) const;
};

/// 1 on [0,1], 0 on [2,∞), quintic smoothstep in between.
double chi(double z);
double chi_d1(double z);
double chi_d2(double z);

/// Quintic smoothstep S(z) = 6z^5 - 15z^4 + 10z^3 on [0,1], clamped outside.
double smoothstep(double z);
double smoothstep_d1(double z);

struct ApproxProfileParams {
    double a4 = 0.0, a7 = 0.0, a10 = 0.0, a11 = 0.0;
    double cutoff_scale_exponent = 2.0 / 7.0;
    Theta theta{};

    /// Coefficients read from the exact iterate chain.
    static ApproxProfileParams from_algebra();

    /// -a4 b Y^4 - a7 b^2 Y^7 - a10 b^3 Y^10 - a11 b^3 Y^11 and its Y-derivatives (k = 0..2).
    double correction(double b, double Y, int k = 0) const;
};

struct ProfileValue {
    double u = 0.0, uy = 0.0, uyy = 0.0;
};

/// χ(Y/s^{2/7}) [Y + correction] + Θ(√b Y)/b with two Y-derivatives.
ProfileValue eval_uapp_full(double s, double b, double Y, const ApproxProfileParams& p);
double eval_uapp(double s, double b, double Y, const ApproxProfileParams& p);
Field eval_uapp(double s, double b, GridPtr grid, const ApproxProfileParams& p);

/// Rescaled initial profile U0 = q + R + Θ(√b Y)/b.
/// R'' = χ(Y/L) P''(Y) with P the polynomial correction and R(0) = R'(0) = 0,
/// q' = 1 - (1 - δ) S((Y - L)/L) with δ = -R'(∞), L = s^{2/7}.
/// U0 coincides with U^app on Y ≤ L, is increasing, and U0'' ≤ 1.
class CompletedProfile {
public:
    CompletedProfile(double s, double b, ApproxProfileParams params);

    ProfileValue eval(double Y) const;
    double value(double Y) const { return eval(Y).u; }
    /// lim_{Y→∞} U0.
    double far_value() const;
    double s() const { return s_; }
    double b() const { return b_; }
    double cutoff() const { return L_; }
    double delta() const { return delta_; }
    const ApproxProfileParams& params() const { return p_; }

private:
    double r_part(double Y, int k) const;
    double s_, b_, L_, delta_;
    double R2L_ = 0.0;
    ApproxProfileParams p_;
};

struct InitialData {
    double lambda0 = 0.0;
    double x0 = 1.0;          ///< pressure horizon: u_E(x)² = 2(x0 - x)
    double s0 = 0.0;          ///< 1/b0
    double b0 = 0.0;          ///< -2 λ0² u0''''(0)
    double b0_half = 0.0;     ///< -λ0² u0''''(0), reported alongside b0
    double perturbation_amplitude = 0.0;
    double c7 = 0.0, c8 = 0.0, c10 = 0.0, c11 = 0.0;
    Field u0;                 ///< on the physical y-grid
    CompletedProfile profile{1.0, 1.0, {}};

    /// Physical u0 and derivatives at y (exact evaluation, includes v0).
    ProfileValue eval(double y) const;
};

/// Physical data u0(y) = λ0² U0(s0, y/λ0) + v0(y), s0 fixed by λ0² U0(∞) = u_E(0).
/// v0 = amplitude λ0^{-3/2} (λ0 y^7 + c8 y^8) χ(y/(λ0 L)).
InitialData build_initial_data(double lambda0, GridPtr grid, double perturbation_amplitude = 0.0,
                               double x0 = 1.0);

/// Columns y,u0,u0_prime,u0_second.
void write_initial_data_csv(const InitialData& data, const std::filesystem::path& path);

struct WellPreparedReport {
    double E1_scaled = 0.0;  ///< E1(s0) s0^{13/4 + η/2}
    double E2_scaled = 0.0;  ///< E2(s0) s0^5
    double b_gap = 0.0;      ///< |b(s0) - 1/s0| s0, b read off the Y^4 coefficient of U0
    bool UYY_bounds_ok = false;
    double UYY_max = 0.0;
    double b_measured = 0.0;
};

/// Diagnostic only; U0 lives on a rescaled grid.
WellPreparedReport check_wellprepared(const Field& U0, double s0, double eta);

}  // namespace goldstein
