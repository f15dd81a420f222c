#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lawkit/isoflop.hpp"
#include "lawkit/laws.hpp"

namespace lawkit {

/// One published coefficient set. Exactly one of the optionals is engaged,
/// matching the set's kind; these are embedded data, never refitted.
struct BuiltinSet {
    std::string name;
    std::optional<LawCoefficients> compute;
    std::optional<DataLawCoefficients> data;
    std::optional<AltLawV1Coefficients> alt1;
    std::optional<AltLawV2Coefficients> alt2;
    std::optional<FrontierFit> frontier;
};

/// Known names: paper-compute, paper-data, paper-alt1, paper-alt2,
/// paper-frontier, chinchilla. Throws on anything else, listing the options.
BuiltinSet builtin_coefficients(const std::string& name);

const std::vector<std::string>& builtin_names();

}  // namespace lawkit
