#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polyem/modulus.hpp"

namespace polyem {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Analytic property suite of the coefficient building blocks and the weight
/// tables: L^2 norm of the time factor, the Dini integral of rho^{1/2}, table
/// additivity and nesting, sawtooth/rho/psi identities, truncation tail bound.
std::vector<CheckResult> modulus_property_suite(const ModulusSpec& spec, std::uint64_t seed = 7);

/// Path checks: the increment moment identity at n in {1, 64, 8192}, coupling
/// exactness of the dyadic aggregation, and regeneration determinism.
std::vector<CheckResult> path_property_suite(std::uint64_t seed, std::size_t draws = 1000000);

/// One "[PASS] name: detail" line per result. Returns true iff all passed.
bool print_checks(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace polyem
