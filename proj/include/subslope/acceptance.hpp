#pragma once

// The verification suite behind `subslope verify` and the acceptance binary.
// Each criterion is a self-contained check that reports pass/fail plus a short
// measurement summary.

#include <cstdint>
#include <string>
#include <vector>

namespace subslope {

struct SuiteOptions {
    std::uint64_t seed = 20240601;
    /// Negative control: perturbs the analytic gradient by 1% before it is
    /// compared with finite differences, so the operator criterion must fail.
    bool corrupt_gradient = false;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;  // 0 means no runtime limit
};

/// Criterion names in order: operators, f-infinity, subsolution-routes,
/// manufactured, monitors, attained-slope, kernel, stationary.
const std::vector<std::string>& criterion_names();

/// Throws InvalidArgument for an unknown name.
CriterionResult run_criterion(const std::string& name, const SuiteOptions& opts = {});

std::vector<CriterionResult> run_suite(const std::vector<std::string>& names, const SuiteOptions& opts = {});

/// "PASS  3 subsolution-routes  <detail>  (0.12 s)"
std::string format_result(const CriterionResult& r);

}  // namespace subslope
