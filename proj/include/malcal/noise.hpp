#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "malcal/rng.hpp"

namespace malcal {

struct Atom {
    double value;
    double probability;
};

/// Finite-atom law of the noise variable: mean zero, variance one.
///
/// Instances only come out of binary_noise() / custom_noise(), both of which
/// validate the moment conditions to 1e-12 without renormalising anything.
/// Atoms are stored in ascending order of value.
class NoiseSpec {
  public:
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t atom_count() const noexcept { return atoms_.size(); }
    const std::string& label() const noexcept { return label_; }

    /// Every two-atom law with mean 0 and variance 1 is binary(b) for b = upper atom.
    bool is_binary() const noexcept { return atoms_.size() == 2; }
    double binary_b() const;

    /// Position of `value` among the atoms; throws ValidationError if it is not one.
    std::size_t atom_index(double value) const;

    /// E[xi^k].
    double moment(int k) const;

  private:
    NoiseSpec(std::vector<Atom> atoms, std::string label);
    friend NoiseSpec custom_noise(std::vector<Atom> atoms, std::string label);

    std::vector<Atom> atoms_;
    std::string label_;
};

/// Two-point law on {-1/b, b} with P(-1/b) = b^2/(b^2+1).
NoiseSpec binary_noise(double b);

/// Validates user atoms; throws ValidationError naming the failed invariant.
NoiseSpec custom_noise(std::vector<Atom> atoms, std::string label = "custom");

double draw(const NoiseSpec& spec, Rng& rng);
std::vector<double> sample(const NoiseSpec& spec, Rng& rng, std::size_t count);

}  // namespace malcal
