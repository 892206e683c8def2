#include "malcal/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "malcal/errors.hpp"

namespace malcal {

namespace {

constexpr double kMomentTolerance = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

NoiseSpec::NoiseSpec(std::vector<Atom> atoms, std::string label)
    : atoms_(std::move(atoms)), label_(std::move(label)) {}

double NoiseSpec::binary_b() const {
    if (!is_binary()) throw ValidationError("noise '" + label_ + "' is not binary");
    return atoms_[1].value;
}

std::size_t NoiseSpec::atom_index(double value) const {
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        if (atoms_[k].value == value) return k;
    }
    throw ValidationError("value " + fmt(value) + " is not an atom of noise '" + label_ + "'");
}

double NoiseSpec::moment(int k) const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.probability * std::pow(a.value, k);
    return m;
}

NoiseSpec binary_noise(double b) {
    if (!std::isfinite(b) || b <= 0.0) {
        throw ValidationError("binary noise parameter b must be positive and finite, got " + fmt(b));
    }
    const double denom = b * b + 1.0;
    std::vector<Atom> atoms{{-1.0 / b, b * b / denom}, {b, 1.0 / denom}};
    return custom_noise(std::move(atoms), "binary(b=" + fmt(b) + ")");
}

NoiseSpec custom_noise(std::vector<Atom> atoms, std::string label) {
    if (atoms.size() < 2) throw ValidationError("noise needs at least 2 atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.value) || !std::isfinite(a.probability)) {
            throw ValidationError("noise atoms must be finite");
        }
        if (a.probability <= 0.0) {
            throw ValidationError("noise atom probabilities must be strictly positive, got " +
                                  fmt(a.probability));
        }
        total += a.probability;
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& l, const Atom& r) { return l.value < r.value; });
    for (std::size_t k = 1; k < atoms.size(); ++k) {
        if (atoms[k].value == atoms[k - 1].value) {
            throw ValidationError("noise atom values must be distinct, " + fmt(atoms[k].value) +
                                  " repeats");
        }
    }
    if (std::abs(total - 1.0) > kMomentTolerance) {
        throw ValidationError("noise probabilities must sum to 1, got " + fmt(total));
    }
    double mean = 0.0;
    double second = 0.0;
    for (const auto& a : atoms) {
        mean += a.probability * a.value;
        second += a.probability * a.value * a.value;
    }
    if (std::abs(mean) > kMomentTolerance) {
        throw ValidationError("noise mean must be 0, got " + fmt(mean));
    }
    if (std::abs(second - 1.0) > kMomentTolerance) {
        throw ValidationError("noise variance must be 1, got " + fmt(second));
    }
    return NoiseSpec(std::move(atoms), std::move(label));
}

double draw(const NoiseSpec& spec, Rng& rng) {
    const auto& atoms = spec.atoms();
    const double u = uniform01(rng);
    double cumulative = 0.0;
    for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
        cumulative += atoms[k].probability;
        if (u < cumulative) return atoms[k].value;
    }
    return atoms.back().value;
}

std::vector<double> sample(const NoiseSpec& spec, Rng& rng, std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) v = draw(spec, rng);
    return out;
}

}  // namespace malcal
