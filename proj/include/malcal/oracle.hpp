#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "malcal/functionals.hpp"
#include "malcal/noise.hpp"

namespace malcal::oracle {

/// The full product space {atoms}^M with its product weights.
///
/// Outcomes are numbered in mixed radix, little-endian: coordinate 1 is the
/// least significant digit and digit d selects the d-th atom (ascending value).
/// Nothing in this namespace uses the lattice or Walsh code paths; it is the
/// definition-level reference the other modules are checked against.
class EnumeratedSpace {
  public:
    EnumeratedSpace(NoiseSpec spec, int horizon);

    const NoiseSpec& spec() const noexcept { return spec_; }
    int horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return size_; }

    std::vector<double> outcome(std::size_t index) const;
    double weight(std::size_t index) const;
    std::size_t index_of(Outcome outcome) const;

    /// fn(outcome, weight) for every outcome, in index order.
    template <class Fn>
    void for_each(Fn&& fn) const {
        std::vector<double> omega;
        for (std::size_t idx = 0; idx < size_; ++idx) {
            omega = outcome(idx);
            fn(Outcome(omega), weight(idx));
        }
    }

  private:
    NoiseSpec spec_;
    int horizon_;
    std::size_t size_;
};

double expectation(const EnumeratedSpace& space, const RandomVariableFn& x);

/// E[X | coordinates `given` equal `at`], coordinates 1-based; `at[j]` is the
/// value of coordinate `given[j]` and must be an atom.
double conditional_expectation(const EnumeratedSpace& space, const RandomVariableFn& x,
                               std::span<const int> given, std::span<const double> at);

/// sqrt(n) E[xi_i X | F_{-i}] at `outcome`.
double malliavin(const EnumeratedSpace& space, const RandomVariableFn& x, int i, Outcome outcome,
                 int n);

/// sum_{i <= N} E[Z_i | F_{-i}] xi_i / sqrt(n) at `outcome`.
double skorokhod(const EnumeratedSpace& space, const DiscreteProcessFn& z, int upto,
                 Outcome outcome, int n);

/// sqrt(n) E[xi_i X | F_{i-1}] given the first i-1 coordinates.
double clark_ocone(const EnumeratedSpace& space, const RandomVariableFn& x, int i,
                   std::span<const double> prefix, int n);

}  // namespace malcal::oracle
