#pragma once

#include "goldstein/grid.hpp"

#include <array>

namespace goldstein {

/// Rescaled profile U with cached derivatives and a near-wall expansion
/// U = c1 Y + c2 Y^2 + c3 Y^3 + c4 Y^4 + ...
class OperatorContext {
public:
    /// Expansion fitted from the first nodes. Throws InvalidProfile if
    /// |U_Y(0) - 1| > slope_tol or U is not positive away from the wall.
    explicit OperatorContext(Field U, double slope_tol = 1e-6);
    OperatorContext(Field U, std::array<double, 4> expansion, double slope_tol = 1e-6);

    const Field& U() const { return U_; }
    const Field& UY() const { return UY_; }
    const Field& UYY() const { return UYY_; }
    const GridPtr& grid() const { return U_.grid; }
    const std::array<double, 4>& expansion() const { return c_; }

    /// ∫_0^Y f/U^p for f = O(Y^k), k >= p. The first three cells use the
    /// Taylor series of (f/Y^k)(Y/U)^p.
    Field wall_cumint(const Field& f, int k, int p) const;

private:
    void validate(double slope_tol) const;
    Field U_, UY_, UYY_;
    std::array<double, 4> c_{};
};

/// Cubic near-wall coefficients of f/Y^k from nodes 1..4.
std::array<double, 4> wall_series(const Field& f, int k);

/// Throws SingularInput unless f = O(Y^2) at the wall.
void require_quadratic_vanishing(const Field& f, const char* what);

/// L_U w = U w - U_Y ∫_0^Y w.
Field op_L(const OperatorContext& ctx, const Field& w);

/// L_U^{-1} f = U_Y ∫_0^Y f/U^2 + f/U, for f = O(Y^2).
Field op_Linv(const OperatorContext& ctx, const Field& f);

/// L_U^{-1} ∂_YY v.
Field op_cLU(const OperatorContext& ctx, const Field& v);

/// L_U^{-1}(U_YY - 1).
Field op_diffusion(const OperatorContext& ctx);

/// -(D ∫_0^Y w/U^2)_Y + 2 (U ∫_0^Y w D/U^3)_Y, for w = O(Y^2) and D = O(Y).
Field op_commutator(const OperatorContext& ctx, const Field& D, const Field& w);

/// ∂_Y^k L_U^{-1} w from the closed-form expressions, k = 1, 2, 3.
/// Needs w = O(Y^2) for k <= 2 and w = O(Y^3) for k = 3.
Field dLinv(const OperatorContext& ctx, const Field& w, int order);

}  // namespace goldstein
