#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lob {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the end-to-end checks on the built-in scenarios, the similarity solver and the exact
/// solutions. Prints one "PASS"/"FAIL" line per check to `out` (when given) as it goes.
std::vector<CriterionResult> run_acceptance(std::ostream* out);

}  // namespace lob
