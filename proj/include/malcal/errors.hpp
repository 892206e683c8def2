#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace malcal {

/// Rejected input: a violated precondition or invariant.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Refusal to run an exact computation whose cost exceeds the configured cap.
class CostGuardError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The coupled Brownian path ran out of horizon before producing all steps.
class CouplingUnderrun : public std::runtime_error {
  public:
    CouplingUnderrun(std::size_t achieved, std::size_t required)
        : std::runtime_error("coupling under-run: " + std::to_string(achieved) + " of " +
                             std::to_string(required) + " crossings before the horizon"),
          achieved_(achieved),
          required_(required) {}

    std::size_t achieved() const noexcept { return achieved_; }
    std::size_t required() const noexcept { return required_; }

  private:
    std::size_t achieved_;
    std::size_t required_;
};

/// Exact enumerations are refused beyond this many terms.
inline constexpr std::size_t kEnumerationLimit = std::size_t{1} << 24;

}  // namespace malcal
