// acceptance.hpp — the end-to-end acceptance suite shared by the test binary
// and `nrqb validate`.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nrqb {

struct CriterionResult {
    std::string id;     // "H1" … "S3"
    std::string title;
    bool hard = true;   // hard criteria gate the exit status, soft ones are reported
    bool passed = false;
    std::string detail; // measured values against their bounds
    double seconds = 0.0;
};

struct AcceptanceOptions {
    /// Multiplies every tolerance; 0 forces failures.
    double tolerance_scale = 1.0;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "PASS H1 title: detail" for hard criteria, "PASS"/"FLAG" for soft ones.
std::string format_result(const CriterionResult& r);
bool hard_criteria_pass(const std::vector<CriterionResult>& results);

/// Prints one line per criterion plus a summary; returns hard_criteria_pass.
bool print_report(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace nrqb
