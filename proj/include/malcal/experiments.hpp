#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "malcal/functionals.hpp"
#include "malcal/kernel.hpp"
#include "malcal/noise.hpp"
#include "malcal/walsh.hpp"

namespace malcal::experiments {

/// Stream domains; each experiment draws from streams (seed, domain(tag, n), path).
enum class StreamTag : std::uint64_t {
    skorokhod = 1,
    chaos = 2,
    clark_ocone = 3,
    s_transform = 4,
    exact_check = 5,
    simulate = 6,
};
std::uint64_t stream_domain(StreamTag tag, std::uint64_t n);

struct ConvergenceReport {
    std::vector<int> n_values;
    std::vector<double> mse;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    double wall_time_seconds = 0.0;
};

struct LogLogFit {
    double slope;
    double intercept;
    double r_squared;
};

/// Least squares of log(ys) on log(xs). Needs >= 3 strictly positive points.
LogLogFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys);

// --- Skorokhod integral of sign(1/2 - t)(B_1 B_{1-t} - (1-t)) ------------------

struct SkorokhodOptions {
    double b = 1.0;
    std::vector<int> n_values;
    std::size_t paths = 10000;
    int fine_factor = 64;
    std::uint64_t seed = 42;
    int threads = 0;
};

/// Z^n_i = sign(1/2 - i/n) (B^n_1 B^n_{(n-i)/n} - (1 - i/n)) for 1 <= i <= n-1,
/// Z^n_n = 0, with sign(0) = +1. Generic form for cross-checks.
DiscreteProcessFn example_integrand(int n);

/// delta^n(Z^n) for the integrand above, through the binary pathwise formula
/// with N = n, in O(n). `xi` holds at least n increments.
double example_discrete_skorokhod(std::span<const double> xi, double b, int n);

/// Closed form of the continuous Skorokhod integral:
/// B_1 B_{1/2}^2 - B_1 / 2 - B_{1/2}.
double example_reference_skorokhod(double b_half, double b_one);

/// Mean of |delta^n(Z^n) - delta(Z)|^2 over coupled paths for each n (even n only).
ConvergenceReport skorokhod_convergence_experiment(const SkorokhodOptions& options);

// --- chaos coefficients ---------------------------------------------------------

enum class ChaosFunctional { brownian_end, square_minus_one, wick_exponential };

/// "B1", "B1sq-1" or "wick-exp".
ChaosFunctional parse_chaos_functional(const std::string& label);
std::string to_string(ChaosFunctional f);

/// X^n on the first n increments: B^n_1, (B^n_1)^2 - 1, or prod (1 + xi_i / sqrt n).
double chaos_functional_value(ChaosFunctional f, std::span<const double> xi, int n);

/// Exact discrete chaos kernel f^{n,k}_{X^n} for binary(b) noise.
DiscreteKernel exact_chaos_kernel(ChaosFunctional f, int k, int n, double b);

/// Continuous chaos kernel f^k_X as a box function.
TensorStep target_chaos_kernel(ChaosFunctional f, int k);

struct ChaosOptions {
    ChaosFunctional functional = ChaosFunctional::brownian_end;
    int k = 1;
    int n = 16;
    double b = 1.0;
    std::size_t paths = 10000;
    std::uint64_t seed = 42;
    int threads = 0;
};

struct ChaosEstimate {
    int n = 0;
    int k = 0;
    std::size_t paths = 0;
    DiscreteKernel estimate{0, 1};
    DiscreteKernel exact{0, 1};
    double l2_error = 0.0;        // || embed(estimate) - f^k ||
    double bias = 0.0;            // || embed(exact) - f^k ||
    double mc_noise = 0.0;        // || estimate - exact ||
    double mc_noise_scale = 0.0;  // sqrt of the summed per-cell squared standard errors
};

/// Monte Carlo estimate of every off-diagonal cell E[X^n (n^{k/2}/k!) Xi_A].
ChaosEstimate chaos_estimation_experiment(const ChaosOptions& options);

// --- Clark-Ocone derivative of B_1^2 ---------------------------------------------

struct ClarkOconeOptions {
    double b = 1.0;
    std::vector<int> n_values;
    std::size_t paths = 2000;
    int fine_factor = 64;
    int grid_points = 8;
    std::size_t inner_samples = 256;
    std::uint64_t seed = 42;
    int threads = 0;
};

/// Mean over paths and t in {1/G, ..., 1} of |nabla^n_{ceil(nt)} (B^n_1)^2 - 2 B_t|^2.
/// Nested Monte Carlo cells subtract their estimated inner variance.
ConvergenceReport clark_ocone_convergence_experiment(const ClarkOconeOptions& options);

// --- S-transform of a Wick exponential -----------------------------------------

struct STransformRow {
    int n = 0;
    double exact = 0.0;   // prod_i (1 + g(i/n) h(i/n) / n)
    double target = 0.0;  // exp(<g, h>)
    double abs_diff = 0.0;
    double mc_estimate = 0.0;
    double mc_std_error = 0.0;
    std::size_t paths = 0;
};

struct STransformOptions {
    StepFunction g = StepFunction::indicator(0.0, 1.0);
    StepFunction h = StepFunction::indicator(0.0, 1.0);
    std::vector<int> n_values;
    std::size_t paths = 0;  // 0: exact values only
    std::uint64_t seed = 42;
};

double s_transform_exact(const StepFunction& g, const StepFunction& h, int n);

std::vector<STransformRow> s_transform_convergence_experiment(const STransformOptions& options,
                                                              const NoiseSpec& spec);

/// Whether |exact - target| never increases along the rows.
bool differences_monotone(std::span<const STransformRow> rows);

// --- chaos tails -----------------------------------------------------------------

/// sum_{k >= m} k! ||f^{n,k}_X||^2, which equals sum_{|A| >= m} X_A^2.
double tail_mass(const walsh::WalshVector& x, int m);
/// sum_{k >= m} k k! ||f^{n,k}_X||^2.
double weighted_tail_mass(const walsh::WalshVector& x, int m);

// --- output ------------------------------------------------------------------------

/// Header `n,mse,ci_low,ci_high` and one row per n.
void write_report_csv(std::ostream& out, const ConvergenceReport& report);
/// `{"slope":..,"intercept":..,"r2":..,"paths":..,"seed":..}`.
void write_summary_json(std::ostream& out, const ConvergenceReport& report);
/// Whole report (without wall time) as one JSON object.
void write_report_json(std::ostream& out, const ConvergenceReport& report);

}  // namespace malcal::experiments
