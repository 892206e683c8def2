#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "malcal/noise.hpp"
#include "malcal/rng.hpp"

namespace malcal {

/// Realized increments of the rescaled random walk B^n_t = n^{-1/2} sum_{i <= floor(nt)} xi_i.
struct WalkPath {
    int n = 1;
    std::vector<double> increments;
    std::string spec_label;

    std::size_t horizon() const noexcept { return increments.size(); }

    /// Walk value after k steps.
    double value_at_step(std::size_t k) const;
};

WalkPath simulate_walk(const NoiseSpec& spec, int n, std::size_t steps, Rng& rng);

/// B^n_t; throws std::out_of_range when floor(nt) exceeds the horizon.
double walk_value(const WalkPath& path, double t);

/// Random walk embedded in a Brownian path together with B at fixed times.
struct CoupledPath {
    WalkPath walk;
    std::vector<double> bm_times;
    std::vector<double> bm_values;
    std::vector<double> passage_times;   // tau_1..tau_M; tau_0 = 0 is implicit
    std::vector<double> passage_values;  // B(tau_i) as seen on the fine grid
    double fine_mesh = 0.0;
};

struct CouplingOptions {
    int fine_factor = 64;
    /// Simulated time limit; <= 0 selects 2 * max(last bm time, steps / n) + 4.
    double horizon = 0.0;
};

/// Brownian motion on a grid of mesh 1/(K n) with the binary skeleton read off
/// as successive exits from (level - 1/(b sqrt n), level + b/sqrt n), where
/// level is the current walk value. Between grid points a Brownian-bridge test
/// catches crossings that the grid misses. Each recorded increment is the exact
/// barrier value; the grid path keeps its overshoot.
/// Throws CouplingUnderrun if the horizon ends before `steps` crossings.
CoupledPath simulate_coupled_binary(double b, int n, std::size_t steps,
                                    std::span<const double> bm_times, Rng& rng,
                                    const CouplingOptions& options = {});

struct ExitSample {
    double time;
    bool upper;
};

/// Exact draw of the exit time of a standard Brownian motion from (-alpha, beta)
/// and of the side it exits through. Acceptance-rejection against the
/// one-sided hitting-time density, with the two-sided theta series evaluated
/// until its remainder bound drops below `tol`.
ExitSample sample_exit(double alpha, double beta, Rng& rng, double tol = 1e-10);

double sample_first_passage_time(double alpha, double beta, Rng& rng, double tol = 1e-10);

/// Density of the exit time from (-alpha, beta) at t.
double exit_time_density(double alpha, double beta, double t, double tol = 1e-14);

/// Binary walk together with its exact passage times (no Brownian values).
struct Skeleton {
    WalkPath walk;
    std::vector<double> passage_times;
};

Skeleton simulate_skeleton_binary(double b, int n, std::size_t steps, Rng& rng,
                                  double tol = 1e-10);

/// Writes `# n=..,b=..,seed=..` followed by `i,xi,tau` rows. An empty
/// `passage_times` leaves the tau column empty.
void write_path_csv(std::ostream& out, const WalkPath& path,
                    std::span<const double> passage_times, double b, std::uint64_t seed);

}  // namespace malcal
