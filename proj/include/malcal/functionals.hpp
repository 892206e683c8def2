#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace malcal {

/// Increment vector (xi_1, ..., xi_M); coordinate i lives at position i-1.
using Outcome = std::span<const double>;

/// A random variable on the first M increments, given as a pure evaluation map.
/// The map must be deterministic and reentrant; it is called concurrently.
class RandomVariableFn {
  public:
    using Eval = std::function<double(Outcome)>;

    RandomVariableFn() = default;
    RandomVariableFn(int horizon, Eval eval, std::string label = {});

    int horizon() const noexcept { return horizon_; }
    const std::string& label() const noexcept { return label_; }

    /// Evaluates on the first horizon() coordinates of `outcome`.
    double operator()(Outcome outcome) const;

  private:
    int horizon_ = 0;
    Eval eval_;
    std::string label_;
};

/// A discrete process Z_1..Z_M, each component a random variable on M increments.
/// With the predictable flag, Z_i may only read coordinates 1..i-1.
class DiscreteProcessFn {
  public:
    DiscreteProcessFn() = default;
    explicit DiscreteProcessFn(std::vector<RandomVariableFn> components, bool predictable = false);

    int horizon() const noexcept { return static_cast<int>(components_.size()); }
    bool predictable() const noexcept { return predictable_; }

    /// Component Z_i, 1-based.
    const RandomVariableFn& component(int i) const;

  private:
    std::vector<RandomVariableFn> components_;
    bool predictable_ = false;
};

}  // namespace malcal
