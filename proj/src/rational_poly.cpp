#include "goldstein/rational_poly.hpp"

#include "goldstein/errors.hpp"

#include <algorithm>
#include <sstream>

namespace goldstein {

namespace {

void check_degree(const Monomial& m) {
    if (m.y > kMaxDegree || m.b > kMaxDegree || m.bs > kMaxDegree)
        throw DegreeOverflow("monomial degree exceeds " + std::to_string(kMaxDegree));
    if (m.y < 0 || m.b < 0 || m.bs < 0)
        throw UnsupportedInput("negative exponent");
}

}  // namespace

RationalPoly::RationalPoly(const Rational& c) {
    if (c != 0) terms_[{}] = c;
}

RationalPoly RationalPoly::monomial(const Rational& c, int y, int b, int bs) {
    RationalPoly p;
    p.add_term({y, b, bs}, c);
    return p;
}

Rational RationalPoly::coeff(int y, int b, int bs) const {
    auto it = terms_.find({y, b, bs});
    return it == terms_.end() ? Rational(0) : it->second;
}

int RationalPoly::max_degree_y() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.y);
    return d;
}

int RationalPoly::max_degree_b() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.b);
    return d;
}

int RationalPoly::max_degree_bs() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.bs);
    return d;
}

int RationalPoly::min_degree_y() const {
    int d = kMaxDegree + 1;
    for (const auto& [m, c] : terms_) d = std::min(d, m.y);
    return d;
}

void RationalPoly::add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    check_degree(m);
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

RationalPoly& RationalPoly::operator+=(const RationalPoly& q) {
    for (const auto& [m, c] : q.terms_) add_term(m, c);
    return *this;
}

RationalPoly& RationalPoly::operator-=(const RationalPoly& q) {
    for (const auto& [m, c] : q.terms_) add_term(m, -c);
    return *this;
}

RationalPoly& RationalPoly::operator*=(const RationalPoly& q) {
    RationalPoly out;
    for (const auto& [m1, c1] : terms_)
        for (const auto& [m2, c2] : q.terms_)
            out.add_term({m1.y + m2.y, m1.b + m2.b, m1.bs + m2.bs}, c1 * c2);
    terms_ = std::move(out.terms_);
    return *this;
}

RationalPoly operator-(RationalPoly p) {
    for (auto& [m, c] : p.terms_) c = -c;
    return p;
}

RationalPoly RationalPoly::slice(int b, int bs) const {
    RationalPoly out;
    for (const auto& [m, c] : terms_)
        if (m.b == b && m.bs == bs) out.add_term({m.y, 0, 0}, c);
    return out;
}

double RationalPoly::evaluate(double Y, double b, double bs) const {
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = static_cast<double>(c);
        for (int i = 0; i < m.y; ++i) t *= Y;
        for (int i = 0; i < m.b; ++i) t *= b;
        for (int i = 0; i < m.bs; ++i) t *= bs;
        sum += t;
    }
    return sum;
}

std::string RationalPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        Rational a = c;
        if (first) {
            if (a < 0) {
                os << "-";
                a = -a;
            }
        } else {
            os << (a < 0 ? " - " : " + ");
            if (a < 0) a = -a;
        }
        first = false;
        os << a;
        if (m.y) os << "*Y^" << m.y;
        if (m.b) os << "*b^" << m.b;
        if (m.bs) os << "*bs^" << m.bs;
    }
    return os.str();
}

RationalPoly RationalPoly::parse(const std::string& text) {
    RationalPoly p;
    std::string s;
    for (char ch : text)
        if (ch != ' ') s.push_back(ch);
    if (s == "0") return p;
    std::size_t pos = 0;
    while (pos < s.size()) {
        int sign = 1;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = s[pos] == '-' ? -1 : 1;
            ++pos;
        }
        std::size_t end = s.find_first_of("+-", pos);
        std::string term = s.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        pos = end == std::string::npos ? s.size() : end;

        Monomial m;
        std::istringstream ts(term);
        std::string factor;
        Rational c(sign);
        bool have_coeff = false;
        while (std::getline(ts, factor, '*')) {
            auto caret = factor.find('^');
            if (caret == std::string::npos) {
                if (have_coeff) throw UnsupportedInput("malformed polynomial: " + text);
                c *= Rational(factor);
                have_coeff = true;
                continue;
            }
            std::string var = factor.substr(0, caret);
            int e = std::stoi(factor.substr(caret + 1));
            if (var == "Y") m.y = e;
            else if (var == "b") m.b = e;
            else if (var == "bs") m.bs = e;
            else throw UnsupportedInput("unknown variable in polynomial: " + var);
        }
        p.add_term(m, c);
    }
    return p;
}

RationalPoly poly_arith(const RationalPoly& p, const RationalPoly& q, ArithOp op) {
    switch (op) {
        case ArithOp::add: return p + q;
        case ArithOp::sub: return p - q;
        case ArithOp::mul: return p * q;
    }
    return {};
}

RationalPoly derivative_Y(const RationalPoly& p) {
    RationalPoly out;
    for (const auto& [m, c] : p.terms())
        if (m.y > 0) out.add_term({m.y - 1, m.b, m.bs}, c * m.y);
    return out;
}

RationalPoly antiderivative_Y(const RationalPoly& p) {
    RationalPoly out;
    for (const auto& [m, c] : p.terms())
        out.add_term({m.y + 1, m.b, m.bs}, c / (m.y + 1));
    return out;
}

RationalPoly s_derivative(const RationalPoly& p) {
    if (p.max_degree_bs() > 0)
        throw UnsupportedInput("s_derivative: input already contains b_s");
    RationalPoly out;
    for (const auto& [m, c] : p.terms())
        if (m.b > 0) out.add_term({m.y, m.b - 1, 1}, c * m.b);
    return out;
}

RationalPoly substitute_bs(const RationalPoly& p) {
    RationalPoly out;
    for (const auto& [m, c] : p.terms()) {
        Rational sign = (m.bs % 2 == 0) ? 1 : -1;
        out.add_term({m.y, m.b + 2 * m.bs, 0}, c * sign);
    }
    return out;
}

RationalPoly apply_L(const RationalPoly& w1, const RationalPoly& w2) {
    return w1 * w2 - derivative_Y(w1) * antiderivative_Y(w2);
}

RationalPoly prandtl_residual(const RationalPoly& u) {
    const RationalPoly us = s_derivative(u);
    const RationalPoly uy = derivative_Y(u);
    const RationalPoly b = RationalPoly::B();
    RationalPoly r = u * us - uy * antiderivative_Y(us) - b * u * u +
                     Rational(3, 2) * b * uy * antiderivative_Y(u) - derivative_Y(uy) + RationalPoly(1);
    return r;
}

RationalPoly next_iterate(const RationalPoly& uN) {
    if (uN.coeff(0) != 0 || uN.coeff(1) != 1 || uN.min_degree_y() < 1)
        throw InvalidProfile("next_iterate: profile must satisfy U(0)=0 and U_Y(0)=1");
    const RationalPoly r = substitute_bs(prandtl_residual(uN));
    return uN + antiderivative_Y(antiderivative_Y(r));
}

BsFactorization divide_by_bs_plus_b2(const RationalPoly& p) {
    // Synthetic division in the variable b_s by (b_s - (-b^2)).
    const int n = p.max_degree_bs();
    std::vector<RationalPoly> coeffs(n + 1);
    for (const auto& [m, c] : p.terms()) coeffs[m.bs].add_term({m.y, m.b, 0}, c);
    const RationalPoly root = -RationalPoly::B(2);
    BsFactorization out;
    RationalPoly carry;
    for (int k = n; k >= 1; --k) {
        carry = coeffs[k] + carry * root;
        out.quotient += carry * RationalPoly::Bs(k - 1);
    }
    out.remainder = coeffs[0] + carry * root;
    return out;
}

std::vector<RationalPoly> iterate_chain(int count) {
    std::vector<RationalPoly> chain{RationalPoly::Y() + Rational(1, 2) * RationalPoly::Y(2)};
    while (static_cast<int>(chain.size()) < count) chain.push_back(next_iterate(chain.back()));
    return chain;
}

ProfileCoefficients profile_coefficients() {
    const auto chain = iterate_chain(4);
    const RationalPoly& u4 = chain[3];
    return {-u4.coeff(4, 1), -u4.coeff(7, 2), -u4.coeff(10, 3),
            -u4.coeff(11, 3), u4.coeff(13, 4), u4.coeff(16, 5)};
}

RationalPoly uapp_polynomial() {
    const auto a = profile_coefficients();
    using P = RationalPoly;
    return P::Y() + Rational(1, 2) * P::Y(2) - P::monomial(a.a4, 4, 1) - P::monomial(a.a7, 7, 2) -
           P::monomial(a.a10, 10, 3) - P::monomial(a.a11, 11, 3);
}

RemainderDecomposition remainder_decomposition(const RationalPoly& u) {
    using P = RationalPoly;
    const P b = P::B();
    // Transport part ∂_sU - bU + (b/2) Y U_Y.
    const P transport = s_derivative(u) - b * u + Rational(1, 2) * b * P::Y() * derivative_Y(u);
    const BsFactorization split = divide_by_bs_plus_b2(-transport);

    RemainderDecomposition out;
    out.coeff_bs_b2 = split.quotient;
    for (const auto& [m, c] : split.remainder.terms())
        if (m.b == 4) out.coeff_b4.add_term({m.y, 0, 0}, c);
    const P rest = split.remainder - out.coeff_b4 * P::B(4);
    // remainder = rest + L_U^{-1}(U_YY - 1) = L_U^{-1}(L_U rest + U_YY - 1).
    out.inverse_part = apply_L(u, rest) + derivative_Y(derivative_Y(u)) - P(1);
    if (out.coeff_bs_b2.max_degree_bs() > 0)
        throw AlgebraFailure("remainder: (b_s+b^2) coefficient still depends on b_s");

    const std::vector<Monomial> allowed{{11, 4, 0}, {12, 4, 0}, {14, 5, 0}, {17, 6, 0}, {18, 6, 0}};
    for (const auto& [m, c] : out.inverse_part.terms()) {
        if (std::find(allowed.begin(), allowed.end(), m) == allowed.end())
            throw AlgebraFailure("remainder: unexpected monomial Y^" + std::to_string(m.y) + " b^" +
                                 std::to_string(m.b) + " bs^" + std::to_string(m.bs) +
                                 " in the L_U^{-1} part");
    }
    for (const auto& m : allowed) out.d_constants.emplace_back(m.y, out.inverse_part.coeff(m.y, m.b, m.bs));
    return out;
}

VCoefficients leading_V_coefficients() {
    const auto chain = iterate_chain(2);
    // Second iterate without eliminating b_s, minus the one with b_s -> -b^2.
    const RationalPoly raw = antiderivative_Y(antiderivative_Y(prandtl_residual(chain[1])));
    const RationalPoly diff = raw - substitute_bs(raw);
    const BsFactorization f = divide_by_bs_plus_b2(diff);
    if (!f.remainder.is_zero()) throw AlgebraFailure("V coefficients: difference not divisible by b_s+b^2");
    return {f.quotient.coeff(7), f.quotient.coeff(8)};
}

// ---------------------------------------------------------------------------

Series to_series(const RationalPoly& p, int order) {
    Series s(order + 1, Rational(0));
    for (const auto& [m, c] : p.terms()) {
        if (m.b != 0 || m.bs != 0) throw UnsupportedInput("to_series: polynomial must depend on Y only");
        if (m.y <= order) s[m.y] += c;
    }
    return s;
}

RationalPoly from_series(const Series& s) {
    RationalPoly p;
    for (std::size_t k = 0; k < s.size(); ++k) p.add_term({static_cast<int>(k), 0, 0}, s[k]);
    return p;
}

namespace {

Series series_mul(const Series& a, const Series& b, int order) {
    Series out(order + 1, Rational(0));
    for (int i = 0; i <= order && i < static_cast<int>(a.size()); ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; i + j <= order && j < static_cast<int>(b.size()); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Series series_inverse(const Series& a, int order) {
    if (a.empty() || a[0] == 0) throw SingularInput("series_inverse: zero constant term");
    Series out(order + 1, Rational(0));
    out[0] = 1 / a[0];
    for (int n = 1; n <= order; ++n) {
        Rational acc = 0;
        for (int k = 1; k <= n && k < static_cast<int>(a.size()); ++k) acc += a[k] * out[n - k];
        out[n] = -acc / a[0];
    }
    return out;
}

Series shift_down(const Series& a, int k) {
    for (int i = 0; i < k && i < static_cast<int>(a.size()); ++i)
        if (a[i] != 0) throw SingularInput("series does not vanish to the required order");
    Series out;
    for (std::size_t i = k; i < a.size(); ++i) out.push_back(a[i]);
    return out;
}

Series series_derivative(const Series& a) {
    Series out;
    for (std::size_t i = 1; i < a.size(); ++i) out.push_back(a[i] * static_cast<long>(i));
    return out;
}

}  // namespace

Series linv_series(const Series& u, const Series& f, int order) {
    // U = Y q with q(0) != 0;  f/U^2 = (f/Y^2) / q^2,  f/U = (f/Y) / q.
    const Series q = shift_down(u, 1);
    const Series qinv = series_inverse(q, order);
    const Series qinv2 = series_mul(qinv, qinv, order);
    const Series g = series_mul(shift_down(f, 2), qinv2, order);  // f/U^2
    Series integral(order + 2, Rational(0));
    for (int k = 0; k <= order; ++k) integral[k + 1] = g[k] / (k + 1);
    integral.resize(order + 1);
    const Series uy = series_derivative(u);
    Series out = series_mul(uy, integral, order);
    Series fu = series_mul(shift_down(f, 1), qinv, order);  // f/U
    for (int k = 0; k <= order; ++k) out[k] += fu[k];
    return out;
}

Series cLU_power_series(const Series& u, const Series& v, int k, int order) {
    Series cur = v;
    for (int i = 0; i < k; ++i) {
        Series d2 = series_derivative(series_derivative(cur));
        d2.resize(order + 1, Rational(0));
        cur = linv_series(u, d2, order);
    }
    return cur;
}

Rational perturbation_c8() {
    const int order = 12;
    const Series u = to_series(RationalPoly::Y() + Rational(1, 2) * RationalPoly::Y(2), order);
    const Series l7 = cLU_power_series(u, to_series(RationalPoly::Y(7), order), 2, order);
    const Series l8 = cLU_power_series(u, to_series(RationalPoly::Y(8), order), 2, order);
    // Linear term of the Y-derivative is twice the Y^2 coefficient.
    if (l8[2] == 0) throw AlgebraFailure("c8: degenerate Y^8 contribution");
    return -l7[2] / l8[2];
}

PhysicalCoefficients physical_coefficients() {
    const RationalPoly up = uapp_polynomial();
    // A term c b^j Y^k becomes c (-2)^j u''''(0)^j y^k λ^{2+2j-k} under u = λ^2 U(y/λ).
    auto image = [&](int k, int j) {
        Rational factor = 1;
        for (int i = 0; i < j; ++i) factor *= -2;
        return up.coeff(k, j) * factor;
    };
    return {-image(7, 2), image(10, 3), image(11, 3)};
}

}  // namespace goldstein
