#include "goldstein/certificate.hpp"

#include "goldstein/errors.hpp"

#include <sstream>

namespace goldstein {

namespace {

using P = RationalPoly;

std::string rat_str(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

IdentityCheck compare(const std::string& name, const P& expected, const P& computed) {
    return {name, expected.to_string(), computed.to_string(), expected == computed};
}

IdentityCheck compare(const std::string& name, const Rational& expected, const Rational& computed) {
    return {name, rat_str(expected), rat_str(computed), expected == computed};
}

}  // namespace

bool AlgebraCertificate::all_pass() const {
    return !first_failure().has_value();
}

std::optional<std::string> AlgebraCertificate::first_failure() const {
    for (const auto& c : identities)
        if (!c.pass) return c.name;
    return std::nullopt;
}

nlohmann::json AlgebraCertificate::to_json() const {
    nlohmann::json j;
    j["identities"] = nlohmann::json::array();
    for (const auto& c : identities)
        j["identities"].push_back(
            {{"name", c.name}, {"expected", c.expected}, {"computed", c.computed}, {"status", c.pass ? "PASS" : "FAIL"}});
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [name, value] : derived) d[name] = rat_str(value);
    j["derived"] = d;
    j["all_pass"] = all_pass();
    return j;
}

AlgebraCertificate build_certificate(const CertificateOptions& opts) {
    AlgebraCertificate cert;
    auto& out = cert.identities;

    // Reference values, written out independently of the engine.
    const Rational a4 = opts.a4_override.value_or(Rational(1, 48));
    const Rational a7 = Rational(1, 48) / 84;
    const Rational a10 = a7 * 27 / 1440;
    const Rational a11 = a7 * 3 / 1760;
    const Rational a13 = Rational(11) * Rational(1, 48) * a7 / 2496;
    const Rational a16 = a7 * a7 / 640;
    const Rational ra4 = Rational(1, 48);

    const P Y = P::Y(), b = P::B(), bs = P::Bs();
    const P bsb2 = bs + b * b;

    const auto chain = iterate_chain(4);
    const P u2_ref = Y + Rational(1, 2) * P::Y(2) - P::monomial(a4, 4, 1);
    const P u3_ref = u2_ref - P::monomial(a7, 7, 2);
    const P u4_ref = u3_ref - P::monomial(a10, 10, 3) - P::monomial(a11, 11, 3) + P::monomial(a13, 13, 4) +
                     P::monomial(a16, 16, 5);
    out.push_back(compare("U2", u2_ref, chain[1]));
    out.push_back(compare("U3", u3_ref, chain[2]));
    out.push_back(compare("U4", u4_ref, chain[3]));

    const auto a = profile_coefficients();
    out.push_back(compare("a4", a4, a.a4));
    out.push_back(compare("a7", a7, a.a7));
    out.push_back(compare("a10", a10, a.a10));
    out.push_back(compare("a11", a11, a.a11));
    out.push_back(compare("a13", a13, a.a13));
    out.push_back(compare("a16", a16, a.a16));

    out.push_back(compare("residual_stationary", P(0), prandtl_residual(Rational(1, 2) * P::Y(2))));
    out.push_back(compare("residual_U1", P::monomial(Rational(-1, 4), 2, 1), prandtl_residual(chain[0])));

    const P res2_ref = -ra4 * (Rational(4, 5) * bs + Rational(13, 10) * b * b) * P::Y(5) -
                       Rational(3, 10) * ra4 * bsb2 * P::Y(6) + ra4 * ra4 * Rational(1, 5) * b * bsb2 * P::Y(8);
    out.push_back(compare("residual_U2", res2_ref, prandtl_residual(chain[1])));

    const P res3_ref =
        bsb2 * (-Rational(4, 5) * ra4 * P::Y(5) - Rational(3, 10) * ra4 * P::Y(6) - ra4 / 60 * b * P::Y(8) -
                Rational(3, 4) * a7 * b * P::Y(9) + Rational(3, 5) * ra4 * a7 * b * b * P::Y(11) +
                Rational(1, 4) * a7 * a7 * b * b * b * P::Y(14)) -
        Rational(27, 16) * a7 * P::B(3) * P::Y(8) - Rational(3, 16) * a7 * P::B(3) * P::Y(9) +
        Rational(11, 16) * ra4 * a7 * P::B(4) * P::Y(11) + Rational(3, 8) * a7 * a7 * P::B(5) * P::Y(14);
    out.push_back(compare("residual_U3", res3_ref, prandtl_residual(chain[2])));

    const P uapp = uapp_polynomial();
    out.push_back(compare("L_U1_Y", Rational(1, 2) * P::Y(2), apply_L(chain[0], Y)));
    const P lY_ref = Rational(1, 2) * P::Y(2) + ra4 * b * P::Y(5) + Rational(5, 2) * a7 * b * b * P::Y(8) +
                     4 * a10 * P::B(3) * P::Y(11) + Rational(9, 2) * a11 * P::B(3) * P::Y(12);
    out.push_back(compare("L_Uapp_Y", lY_ref, apply_L(uapp, Y)));
    const P lY7_ref = Rational(7, 8) * P::Y(8) + Rational(3, 8) * P::Y(9) - ra4 / 2 * b * P::Y(11) -
                      a7 / 8 * b * b * P::Y(14) + a10 / 4 * P::B(3) * P::Y(17) +
                      Rational(3, 8) * a11 * P::B(3) * P::Y(18);
    out.push_back(compare("L_Uapp_Y7", lY7_ref, apply_L(uapp, P::Y(7))));
    out.push_back(compare("kernel_L_U4", P(0), apply_L(chain[3], derivative_Y(chain[3]))));

    const P transport_ref =
        -ra4 * bsb2 * P::Y(4) - a7 * b * (2 * bs + Rational(5, 2) * b * b) * P::Y(7) -
        a10 * P::Y(10) * (3 * bs * b * b + 4 * P::B(4)) - a11 * P::Y(11) * (3 * bs * b * b + Rational(9, 2) * P::B(4));
    out.push_back(compare("transport_Uapp", transport_ref,
                          s_derivative(uapp) - b * uapp + Rational(1, 2) * b * Y * derivative_Y(uapp) +
                              Rational(1, 2) * b * Y));

    const P diffusion_poly = (Rational(5, 4) * a7 - 90 * a10) * P::B(3) * P::Y(8) - 110 * a11 * P::B(3) * P::Y(9) +
                             2 * a10 * P::B(4) * P::Y(11) + Rational(9, 4) * a11 * P::B(4) * P::Y(12);
    out.push_back(compare("diffusion_split", derivative_Y(derivative_Y(uapp)) - P(1),
                          apply_L(uapp, -Rational(1, 2) * b * Y) + diffusion_poly));

    const P q1_ref = ra4 * P::Y(4) + 2 * a7 * b * P::Y(7) + 3 * a10 * b * b * P::Y(10) + 3 * a11 * b * b * P::Y(11);
    const P q2_ref = a10 * P::Y(10) + Rational(3, 2) * a11 * P::Y(11);
    try {
        const auto dec = remainder_decomposition(uapp);
        out.push_back(compare("remainder_bs_b2_part", q1_ref, dec.coeff_bs_b2));
        out.push_back(compare("remainder_b4_part", q2_ref, dec.coeff_b4));
        out.push_back({"remainder_inverse_shape", "span{Y^11 b^4, Y^12 b^4, Y^14 b^5, Y^17 b^6, Y^18 b^6}",
                       dec.inverse_part.to_string(), true});
        for (const auto& [deg, c] : dec.d_constants) cert.derived.emplace_back("d" + std::to_string(deg), c);
    } catch (const AlgebraFailure& e) {
        out.push_back({"remainder_inverse_shape", "span{Y^11 b^4, Y^12 b^4, Y^14 b^5, Y^17 b^6, Y^18 b^6}", e.what(),
                       false});
    }

    const auto v = leading_V_coefficients();
    out.push_back(compare("V_coefficient_Y7", -a7 * 8 / 5, v.c_Y7));
    out.push_back(compare("V_coefficient_Y8", -ra4 * 3 / 560, v.c_Y8));

    const auto pc = physical_coefficients();
    cert.derived.emplace_back("c7", pc.c7);
    cert.derived.emplace_back("c8", perturbation_c8());
    cert.derived.emplace_back("c10", pc.c10);
    cert.derived.emplace_back("c11", pc.c11);
    return cert;
}

}  // namespace goldstein
