#pragma once

#include <cstddef>
#include <span>

#include "malcal/functionals.hpp"
#include "malcal/kernel.hpp"
#include "malcal/noise.hpp"
#include "malcal/path.hpp"
#include "malcal/rng.hpp"

/// Pathwise discrete operators on a finite horizon for finite-atom noise.
///
/// Every conditional expectation over a single coordinate is an exact sum over
/// the atoms. Operators evaluate at one outcome and never average; expectations
/// are formed by the oracle or by Monte Carlo loops in the experiments.
namespace malcal::lattice {

/// prod_i (1 + f(i) xi_i / sqrt(n)); f must be supported in 1..outcome.size().
double wick_exponential(const DiscreteKernel& f, Outcome outcome, int n);

/// E[X | F_{-i}] at `outcome`.
double expectation_except(const RandomVariableFn& x, int i, Outcome outcome,
                          const NoiseSpec& spec);

/// D^n_i X = sqrt(n) sum_atoms p a X(outcome with xi_i = a).
double malliavin_derivative(const RandomVariableFn& x, int i, Outcome outcome,
                            const NoiseSpec& spec, int n);

/// Binary difference form sqrt(n) b/(b^2+1) [X(.., b, ..) - X(.., -1/b, ..)].
double malliavin_derivative_binary(const RandomVariableFn& x, int i, Outcome outcome, double b,
                                   int n);

/// delta^n(Z 1_{[1,N]}) = sum_{i<=N} E[Z_i | F_{-i}] xi_i / sqrt(n).
double skorokhod_integral(const DiscreteProcessFn& z, int upto, Outcome outcome,
                          const NoiseSpec& spec, int n);

/// Binary closed form sum Z_i xi_i/sqrt(n) - (1/n) sum xi_i^2 D^n_i Z_i.
double skorokhod_integral_binary(const DiscreteProcessFn& z, int upto, Outcome outcome, double b,
                                 int n);

/// sum_i Z_i xi_i / sqrt(n) along `path`; Z must carry the predictable flag.
double ito_integral(const DiscreteProcessFn& z, const WalkPath& path);

/// sqrt(n) E[xi_i X | first i-1 coordinates = prefix], by enumerating all
/// atom-count^(M-i+1) suffixes. Throws CostGuardError beyond 2^24 suffixes.
double clark_ocone(const RandomVariableFn& x, int i, std::span<const double> prefix,
                   const NoiseSpec& spec, int n);

struct Estimate {
    double value;
    double std_error;
};

/// Nested Monte Carlo version of clark_ocone: coordinate i is still summed
/// exactly over the atoms, coordinates i+1..M are drawn `samples` times and
/// shared across the atoms.
Estimate clark_ocone_mc(const RandomVariableFn& x, int i, std::span<const double> prefix,
                        const NoiseSpec& spec, int n, std::size_t samples, Rng& rng);

/// Whether clark_ocone can run exactly for this (M, i).
bool clark_ocone_exact_feasible(const NoiseSpec& spec, int horizon, int i);

/// Mean of X exp^{<>_n}(I^n(g-check^n)) over `paths` simulated outcomes,
/// with its standard error.
Estimate s_transform_estimate(const RandomVariableFn& x, const StepFunction& g, int n,
                              const NoiseSpec& spec, std::size_t paths, Rng& rng);

/// Perturbs coordinates i..M at random outcomes and reports whether every
/// component Z_i stayed unchanged.
bool spot_check_predictable(const DiscreteProcessFn& z, const NoiseSpec& spec, Rng& rng,
                            int trials = 32);

}  // namespace malcal::lattice
