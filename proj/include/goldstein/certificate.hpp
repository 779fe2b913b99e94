#pragma once

#include "goldstein/rational_poly.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace goldstein {

struct IdentityCheck {
    std::string name;
    std::string expected;
    std::string computed;
    bool pass = false;
};

struct AlgebraCertificate {
    std::vector<IdentityCheck> identities;
    std::vector<std::pair<std::string, Rational>> derived;  ///< reported, not asserted

    bool all_pass() const;
    /// Name of the first failing identity, if any.
    std::optional<std::string> first_failure() const;
    nlohmann::json to_json() const;
};

/// Fault injection used to check that the certificate catches wrong inputs.
struct CertificateOptions {
    std::optional<Rational> a4_override;  ///< replaces the computed a4 in the U2 comparison
};

AlgebraCertificate build_certificate(const CertificateOptions& opts = {});

}  // namespace goldstein
