#pragma once

#include "goldstein/grid.hpp"
#include "goldstein/profile.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace goldstein {

/// State of w_x = √w w_φφ - 2G on a grid in ζ = √φ.
struct VMState {
    double x = 0.0;
    GridPtr zeta_grid;      ///< ζ nodes
    GridPtr psi_grid;       ///< φ = ζ² at the same indices
    Field W;                ///< over psi_grid
    double lambda = 0.0;    ///< ½ ∂_φ W at φ = 0
    double x0_pressure = 1.0;
    double gradient = 1.0;  ///< G: u_E² = 2 (x0 - G x)

    double far_value(double at_x) const { return 2.0 * (x0_pressure - gradient * at_x); }
};

enum class Scheme { semi_implicit_frozen, implicit_newton };

struct MarchConfig {
    double dx_init = 1e-5;
    double dx_min = 1e-18;
    double cfl_safety = 5e-4;
    double lambda_stop = 1e-3;
    double x_max = 1.0;       ///< horizon for runs that never separate
    Scheme scheme = Scheme::semi_implicit_frozen;
    int newton_max_iter = 12;
    double newton_tol = 1e-12;
    std::size_t max_steps = 2000000;
    int snapshots_per_decade = 12;  ///< in λ
};

/// Geometric ζ grid from first_zeta to √phi_max.
GridPtr default_zeta_grid(std::size_t n = 1600, double first_zeta = 1e-7, double phi_max = 30.0);
/// Geometric y grid used for initial data.
GridPtr default_y_grid(std::size_t n = 20000, double first = 1e-8, double y_max = 30.0);

/// Wall slope ½ lim W/φ from a quartic-in-ζ extrapolation over nodes 1..5.
double wall_lambda(const Field& W, const GridPtr& zeta_grid);

VMState to_von_mises(const Field& u, GridPtr zeta_grid, double x0 = 1.0, double gradient = 1.0);

/// u on the y nodes y(φ) = ∫ dφ/√W, evaluated as ∫ 2ζ/√W dζ.
Field from_von_mises(const VMState& state);

/// √W (W_ζζ - W_ζ/ζ)/(4ζ²) - 2G, the second φ-derivative in ζ form.
Field compute_F(const VMState& state);

/// One backward step. Throws StepFailure if the step cannot be accepted at this dx.
VMState march_step(const VMState& state, double dx, const MarchConfig& cfg);

struct TrajectorySample {
    double x = 0.0, s = 0.0, lambda = 0.0, dx = 0.0;
    double F_max = 0.0;            ///< max over interior nodes
    double monotonicity_min = 0.0; ///< min_i (W_{i+1} - W_i)
};

struct Snapshot {
    double x = 0.0, s = 0.0, lambda = 0.0;
    Field W;
    // state one step later, for time differences
    double x_next = 0.0, s_next = 0.0, lambda_next = 0.0;
    Field W_next;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<Snapshot> snapshots;
    GridPtr zeta_grid, psi_grid;
    double s0 = 0.0, lambda0 = 0.0, x0_pressure = 1.0, gradient = 1.0;
    bool failed = false;
    bool separated = false;
    std::string failure;
};

/// Marches from the initial data until λ ≤ lambda_stop or x ≥ x_max.
/// dx = min(dx_init, cfl λ⁴ s), so Δs ≈ cfl s.
Trajectory solve_until_separation(const InitialData& u0, const MarchConfig& cfg, GridPtr zeta_grid = nullptr,
                                  double gradient = 1.0);

/// Columns x,s,lambda,dx,F_max,monotonicity_min.
void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& path);
/// One file per snapshot pair: phi,W,W_next. Header lines carry x, s, λ.
void write_snapshots(const Trajectory& t, const std::filesystem::path& dir);
Trajectory read_trajectory(const std::filesystem::path& dir);

}  // namespace goldstein
