#pragma once

// Built-in oracle suite behind `cmcfoliate selftest`: exact-arithmetic ring
// and inversion identities, quadrature moments, spectral relations, and the
// finite-difference versus closed-form derivative checks.

#include <string>
#include <vector>

#include "cmcfol/io.hpp"

namespace cmcfol {

struct SelfTestResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<SelfTestResult> run_selftest(const RunConfig& cfg);

}  // namespace cmcfol
