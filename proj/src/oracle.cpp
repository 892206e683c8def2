#include "malcal/oracle.hpp"

#include <cmath>
#include <numeric>

#include "malcal/errors.hpp"
#include "malcal/parallel.hpp"

namespace malcal::oracle {

namespace {

std::size_t checked_power(std::size_t base, int exponent) {
    std::size_t p = 1;
    for (int j = 0; j < exponent; ++j) {
        if (p > kEnumerationLimit / base) {
            throw CostGuardError("enumeration of " + std::to_string(base) + "^" +
                                 std::to_string(exponent) + " outcomes exceeds the limit");
        }
        p *= base;
    }
    return p;
}

}  // namespace

EnumeratedSpace::EnumeratedSpace(NoiseSpec spec, int horizon)
    : spec_(std::move(spec)), horizon_(horizon), size_(0) {
    if (horizon_ < 0) throw ValidationError("horizon must be nonnegative");
    size_ = checked_power(spec_.atom_count(), horizon_);
}

std::vector<double> EnumeratedSpace::outcome(std::size_t index) const {
    const auto& atoms = spec_.atoms();
    std::vector<double> omega(static_cast<std::size_t>(horizon_));
    for (auto& v : omega) {
        v = atoms[index % atoms.size()].value;
        index /= atoms.size();
    }
    return omega;
}

double EnumeratedSpace::weight(std::size_t index) const {
    const auto& atoms = spec_.atoms();
    double w = 1.0;
    for (int c = 0; c < horizon_; ++c) {
        w *= atoms[index % atoms.size()].probability;
        index /= atoms.size();
    }
    return w;
}

std::size_t EnumeratedSpace::index_of(Outcome outcome) const {
    if (static_cast<int>(outcome.size()) != horizon_) {
        throw ValidationError("outcome length does not match the space horizon");
    }
    std::size_t idx = 0;
    for (int c = horizon_ - 1; c >= 0; --c) {
        idx = idx * spec_.atom_count() + spec_.atom_index(outcome[static_cast<std::size_t>(c)]);
    }
    return idx;
}

double expectation(const EnumeratedSpace& space, const RandomVariableFn& x) {
    std::vector<double> terms(space.size());
    for (std::size_t idx = 0; idx < space.size(); ++idx) {
        const auto omega = space.outcome(idx);
        terms[idx] = space.weight(idx) * x(omega);
    }
    return pairwise_sum(terms);
}

double conditional_expectation(const EnumeratedSpace& space, const RandomVariableFn& x,
                               std::span<const int> given, std::span<const double> at) {
    if (given.size() != at.size()) {
        throw ValidationError("conditioning set and partial outcome differ in length");
    }
    const int m = space.horizon();
    std::vector<char> fixed(static_cast<std::size_t>(m), 0);
    std::vector<double> omega(static_cast<std::size_t>(m), 0.0);
    for (std::size_t j = 0; j < given.size(); ++j) {
        const int c = given[j];
        if (c < 1 || c > m) throw std::out_of_range("conditioning coordinate outside 1..M");
        space.spec().atom_index(at[j]);  // validates the value
        fixed[static_cast<std::size_t>(c - 1)] = 1;
        omega[static_cast<std::size_t>(c - 1)] = at[j];
    }
    std::vector<std::size_t> free_coords;
    for (int c = 0; c < m; ++c) {
        if (!fixed[static_cast<std::size_t>(c)]) free_coords.push_back(static_cast<std::size_t>(c));
    }
    const auto& atoms = space.spec().atoms();
    const std::size_t count = checked_power(atoms.size(), static_cast<int>(free_coords.size()));
    std::vector<double> terms(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t rest = idx;
        double w = 1.0;
        for (std::size_t c : free_coords) {
            const auto& a = atoms[rest % atoms.size()];
            rest /= atoms.size();
            omega[c] = a.value;
            w *= a.probability;
        }
        terms[idx] = w * x(omega);
    }
    return pairwise_sum(terms);
}

double malliavin(const EnumeratedSpace& space, const RandomVariableFn& x, int i, Outcome outcome,
                 int n) {
    const int m = space.horizon();
    if (i < 1 || i > m) throw std::out_of_range("Malliavin index outside 1..M");
    const RandomVariableFn xi_times_x(
        m, [&x, i](Outcome w) { return w[static_cast<std::size_t>(i - 1)] * x(w); });
    std::vector<int> given;
    std::vector<double> at;
    for (int c = 1; c <= m; ++c) {
        if (c == i) continue;
        given.push_back(c);
        at.push_back(outcome[static_cast<std::size_t>(c - 1)]);
    }
    return std::sqrt(static_cast<double>(n)) * conditional_expectation(space, xi_times_x, given, at);
}

double skorokhod(const EnumeratedSpace& space, const DiscreteProcessFn& z, int upto,
                 Outcome outcome, int n) {
    const int m = space.horizon();
    if (upto > m || upto > z.horizon()) throw ValidationError("Skorokhod range N exceeds horizon");
    double s = 0.0;
    for (int i = 1; i <= upto; ++i) {
        std::vector<int> given;
        std::vector<double> at;
        for (int c = 1; c <= m; ++c) {
            if (c == i) continue;
            given.push_back(c);
            at.push_back(outcome[static_cast<std::size_t>(c - 1)]);
        }
        s += conditional_expectation(space, z.component(i), given, at) *
             outcome[static_cast<std::size_t>(i - 1)];
    }
    return s / std::sqrt(static_cast<double>(n));
}

double clark_ocone(const EnumeratedSpace& space, const RandomVariableFn& x, int i,
                   std::span<const double> prefix, int n) {
    const int m = space.horizon();
    if (i < 1 || i > m) throw std::out_of_range("Clark-Ocone index outside 1..M");
    if (static_cast<int>(prefix.size()) < i - 1) throw ValidationError("prefix too short");
    const RandomVariableFn xi_times_x(
        m, [&x, i](Outcome w) { return w[static_cast<std::size_t>(i - 1)] * x(w); });
    std::vector<int> given(static_cast<std::size_t>(i - 1));
    std::iota(given.begin(), given.end(), 1);
    return std::sqrt(static_cast<double>(n)) *
           conditional_expectation(space, xi_times_x, given,
                                   prefix.first(static_cast<std::size_t>(i - 1)));
}

}  // namespace malcal::oracle
