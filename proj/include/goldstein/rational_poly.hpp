#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace goldstein {

/// Exact rational number with arbitrary-precision numerator and denominator.
/// Always kept in lowest terms with a positive denominator.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

/// Largest exponent allowed in any variable of a RationalPoly.
inline constexpr int kMaxDegree = 40;

/// Exponent triple of Y^y b^b bs^bs. Ordered lexicographically on (y, b, bs).
struct Monomial {
    int y = 0;
    int b = 0;
    int bs = 0;

    auto operator<=>(const Monomial&) const = default;
};

/// Polynomial in (Y, b, b_s) with exact rational coefficients.
/// Zero coefficients are never stored.
class RationalPoly {
public:
    using Terms = std::map<Monomial, Rational>;

    RationalPoly() = default;
    RationalPoly(const Rational& c);  // NOLINT: constants convert implicitly
    RationalPoly(long c) : RationalPoly(Rational(c)) {}  // NOLINT

    static RationalPoly monomial(const Rational& c, int y, int b = 0, int bs = 0);
    static RationalPoly Y(int k = 1) { return monomial(1, k); }
    static RationalPoly B(int k = 1) { return monomial(1, 0, k); }
    static RationalPoly Bs(int k = 1) { return monomial(1, 0, 0, k); }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    Rational coeff(int y, int b = 0, int bs = 0) const;

    int max_degree_y() const;
    int max_degree_b() const;
    int max_degree_bs() const;
    int min_degree_y() const;

    /// Adds c to the coefficient of the given monomial, dropping zeros.
    void add_term(const Monomial& m, const Rational& c);

    RationalPoly& operator+=(const RationalPoly& q);
    RationalPoly& operator-=(const RationalPoly& q);
    RationalPoly& operator*=(const RationalPoly& q);

    friend RationalPoly operator+(RationalPoly p, const RationalPoly& q) { return p += q; }
    friend RationalPoly operator-(RationalPoly p, const RationalPoly& q) { return p -= q; }
    friend RationalPoly operator*(RationalPoly p, const RationalPoly& q) { return p *= q; }
    friend RationalPoly operator-(RationalPoly p);
    friend bool operator==(const RationalPoly& p, const RationalPoly& q) { return p.terms_ == q.terms_; }

    /// Terms whose b_s and b exponents match, as a polynomial in Y only.
    RationalPoly slice(int b, int bs) const;

    /// Numerical value at (Y, b, bs).
    double evaluate(double Y, double b, double bs = 0.0) const;

    /// Canonical text form, e.g. "1*Y^1 + 1/2*Y^2 - 1/48*Y^4*b^1".
    std::string to_string() const;
    static RationalPoly parse(const std::string& text);

private:
    Terms terms_;
};

enum class ArithOp { add, sub, mul };

RationalPoly poly_arith(const RationalPoly& p, const RationalPoly& q, ArithOp op);

/// ∂_Y p.
RationalPoly derivative_Y(const RationalPoly& p);

/// The antiderivative in Y vanishing at Y = 0.
RationalPoly antiderivative_Y(const RationalPoly& p);

/// ∂_s p where b = b(s) is the only s-dependence and ∂_s b = b_s.
/// Throws UnsupportedInput if p already contains b_s.
RationalPoly s_derivative(const RationalPoly& p);

/// Replaces b_s by -b^2.
RationalPoly substitute_bs(const RationalPoly& p);

/// L_{w1} w2 = w1 w2 - ∂_Y w1 ∫_0^Y w2.
RationalPoly apply_L(const RationalPoly& w1, const RationalPoly& w2);

/// U ∂_sU - U_Y ∫∂_sU - bU^2 + (3b/2) U_Y ∫U - U_YY + 1.
RationalPoly prandtl_residual(const RationalPoly& u);

/// U_{N+1} = U_N + ∫∫ residual(U_N) with b_s replaced by -b^2.
RationalPoly next_iterate(const RationalPoly& uN);

/// Writes p = (b_s + b^2) q + r with r free of b_s.
struct BsFactorization {
    RationalPoly quotient;
    RationalPoly remainder;
};
BsFactorization divide_by_bs_plus_b2(const RationalPoly& p);

struct RemainderDecomposition {
    RationalPoly coeff_bs_b2;          ///< multiplies (b_s + b^2)
    RationalPoly coeff_b4;             ///< multiplies b^4 (Y-polynomial)
    RationalPoly inverse_part;         ///< D with remainder = ... + L_U^{-1} D
    std::vector<std::pair<int, Rational>> d_constants;  ///< (Y-degree, coefficient)
};

/// Splits the polynomial part of the V-equation forcing for the truncated
/// profile u (with V = 0 and no cutoff). Throws AlgebraFailure if the
/// inverse part contains monomials outside b^4Y^11, b^4Y^12, b^5Y^14,
/// b^6Y^17, b^6Y^18 or depends on b_s.
RemainderDecomposition remainder_decomposition(const RationalPoly& u);

/// (b_s+b^2)-normalised Y^7 and Y^8 coefficients of the first corrector V.
struct VCoefficients {
    Rational c_Y7;
    Rational c_Y8;
};
VCoefficients leading_V_coefficients();

/// The chain U_1 = Y + Y^2/2, U_2, U_3, U_4.
std::vector<RationalPoly> iterate_chain(int count = 4);

/// Named profile coefficients read off the iterate chain.
struct ProfileCoefficients {
    Rational a4, a7, a10, a11, a13, a16;
};
ProfileCoefficients profile_coefficients();

/// Polynomial part of the approximate profile:
/// Y + Y^2/2 - a4 b Y^4 - a7 b^2 Y^7 - a10 b^3 Y^10 - a11 b^3 Y^11.
RationalPoly uapp_polynomial();

// ---------------------------------------------------------------------------
// Truncated power series in Y (b-free), used for the inverse operator near
// Y = 0 where U = Y (1 + ...).

/// Coefficients c[k] of sum c[k] Y^k, truncated.
using Series = std::vector<Rational>;

Series to_series(const RationalPoly& p, int order);
RationalPoly from_series(const Series& s);

/// L_U^{-1} f as a truncated series, for U(0) = 0, U_Y(0) != 0 and f = O(Y^2).
Series linv_series(const Series& u, const Series& f, int order);

/// L_U^{-1} ∂_YY applied k times to v, as a truncated series.
Series cLU_power_series(const Series& u, const Series& v, int k, int order);

/// Constant c8 such that ∂_Y(L_U^{-1}∂_YY)^2 (Y^7 + c8 Y^8) has no linear
/// term at Y = 0 when U = Y + Y^2/2.
Rational perturbation_c8();

/// Coefficients (c7, c10, c11) of the physical initial data expansion
/// -c7 u''''(0)^2 y^7/λ + c10 u''''(0)^3 y^10/λ^2 + c11 u''''(0)^3 y^11/λ^3,
/// for the wall relation b = -2 λ^2 u''''(0).
struct PhysicalCoefficients {
    Rational c7, c10, c11;
};
PhysicalCoefficients physical_coefficients();

}  // namespace goldstein
