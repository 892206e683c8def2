#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "malcal/functionals.hpp"
#include "malcal/kernel.hpp"

/// Exact finite-horizon calculus for binary noise on {-1/b, b}.
///
/// A random variable on M coordinates is its Walsh expansion
/// X = sum_A X_A Xi_A with Xi_A = prod_{i in A} xi_i over subsets A of {1..M}.
/// The Xi_A are orthonormal, so E[X] = X_{} and E[XY] = sum_A X_A Y_A.
namespace malcal::walsh {

/// Subset of {1..M} as a bitmask; bit i-1 stands for index i.
using SubsetMask = std::uint32_t;

inline constexpr int kMaxHorizon = 24;

SubsetMask subset_of(std::span<const int> indices);
std::vector<int> members(SubsetMask mask);
int subset_size(SubsetMask mask);

class WalshVector {
  public:
    WalshVector(int horizon, double b);

    int horizon() const noexcept { return horizon_; }
    double b() const noexcept { return b_; }

    double coeff(SubsetMask subset) const;
    void set(SubsetMask subset, double v);
    void add(SubsetMask subset, double v);
    const std::map<SubsetMask, double>& coeffs() const noexcept { return coeffs_; }

    double expectation() const { return coeff(0); }
    double inner(const WalshVector& other) const;
    double squared_norm() const { return inner(*this); }

    /// X at an arbitrary outcome of length >= M.
    double evaluate(Outcome outcome) const;
    /// X at all 2^M outcomes; bit i-1 of the position set means xi_i = b.
    std::vector<double> values() const;

    WalshVector& operator+=(const WalshVector& other);
    WalshVector& operator*=(double s);

  private:
    void check_subset(SubsetMask subset) const;

    int horizon_;
    double b_;
    std::map<SubsetMask, double> coeffs_;
};

WalshVector operator+(WalshVector a, const WalshVector& b);
WalshVector operator-(WalshVector a, const WalshVector& b);
WalshVector operator*(double s, WalshVector a);

/// Outcome for position `bits` in the ordering used by values().
std::vector<double> outcome_of(SubsetMask bits, int horizon, double b);

/// Coefficients X_A = E[X Xi_A] by a coordinate-wise transform over all 2^M outcomes.
WalshVector from_function(const RandomVariableFn& x, double b);
WalshVector from_values(std::span<const double> values, int horizon, double b);

/// Pointwise product, reduced with xi^2 = 1 + (b - 1/b) xi.
WalshVector multiply(const WalshVector& x, const WalshVector& y);

/// D^n_i: coefficient B <- sqrt(n) X_{B u {i}} for i not in B.
WalshVector malliavin_derivative(const WalshVector& x, int i, int n);

/// delta^n(Z): coefficient B <- n^{-1/2} sum_{i in B} (Z_i)_{B \ {i}}; z[0] is Z_1.
WalshVector skorokhod(std::span<const WalshVector> z, int n);

/// nabla^n_i: keeps sqrt(n) X_{B u {i}} for B inside {1..i-1}.
WalshVector clark_ocone(const WalshVector& x, int i, int n);

/// E[X | F_i]: coefficients on subsets of {1..i}.
WalshVector conditional_expectation(const WalshVector& x, int i);

/// exp^{<>_n}(I^n(f)): coefficient A <- n^{-|A|/2} prod_{i in A} f(i).
WalshVector wick_exponential(const DiscreteKernel& f, int n, int horizon, double b);

/// I^{n,k}(f) for symmetric f vanishing on the diagonal:
/// coefficient {i_1 < .. < i_k} <- n^{-k/2} k! f(i_1, .., i_k).
WalshVector multiple_wiener(const DiscreteKernel& f, int n, int horizon, double b);

/// Chaos kernels f^{n,k}_X for k = 0..M, each symmetric and off-diagonal
/// with value (n^{k/2}/k!) X_{{i_1..i_k}}.
std::vector<DiscreteKernel> chaos_coefficients(const WalshVector& x, int n);

/// sum_k I^{n,k}(kernels[k]).
WalshVector from_chaos(std::span<const DiscreteKernel> kernels, int n, int horizon, double b);

/// CSV rows `subset,coefficient`, subset as quoted comma-joined indices.
void write_csv(std::ostream& out, const WalshVector& x);

}  // namespace malcal::walsh
