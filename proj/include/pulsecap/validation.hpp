// Self-check suites runnable from the CLI: each property reports what it
// measured against its bound, so a failing run is diagnosable from the
// emitted JSON alone.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pulsecap::validation {

struct PropertyResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;  // worst observed value
    double bound = 0.0;     // limit it was held against
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::vector<PropertyResult> properties;

    [[nodiscard]] bool passed() const {
        for (const auto& p : properties)
            if (!p.passed) return false;
        return true;
    }
};

// Suites: "analytic" (ODE vs closed forms over random configurations),
// "conservation" (energy balance + phase opposition), "detuning" (evenness,
// maximum on resonance, bandwidth scaling), "delay" (closing-delay factors),
// "statistics" (estimator bias/variance Monte Carlo).  "all" runs every
// suite.  Unknown names throw std::invalid_argument.
[[nodiscard]] std::vector<SuiteResult> run_suites(const std::string& suite,
                                                  std::uint64_t trials,
                                                  std::uint64_t seed);

// JSON serialization of suite results (stable key order).
[[nodiscard]] std::string to_json(const std::vector<SuiteResult>& results);

}  // namespace pulsecap::validation
