#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

/// Randomised exact checks of the finite-horizon identities and of the
/// agreement between the independent operator implementations.
namespace malcal::identities {

struct CheckResult {
    std::string name;
    double b = 1.0;
    int instances = 0;
    int failures = 0;
    double max_error = 0.0;  // largest |lhs - rhs| / max(1, |lhs|, |rhs|, summed term size)

    bool passed() const noexcept { return failures == 0; }
};

struct SuiteOptions {
    int max_horizon = 10;
    int instances = 100;
    double tolerance = 1e-10;
    std::uint64_t seed = 42;
    std::vector<double> b_values{1.0, 2.0};
};

/// |a - b| <= tol * max(1, |a|, |b|).
bool close(double a, double b, double tol);

/// Identities on random table-defined X, Z and kernels; each instance uses a
/// horizon drawn from 2..max_horizon and a mesh n drawn from 1..20.
std::vector<CheckResult> run_identity_suite(const SuiteOptions& options);

/// Lattice vs Walsh vs oracle at horizon exactly max_horizon, on every outcome.
std::vector<CheckResult> run_equivalence_suite(const SuiteOptions& options);

/// `check,b,instances,failures,max_error,status` rows.
void write_results_csv(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace malcal::identities
