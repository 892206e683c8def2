#include "malcal/lattice.hpp"

#include <cmath>
#include <vector>

#include "malcal/errors.hpp"

namespace malcal::lattice {

namespace {

void check_index(int i, std::size_t horizon, const char* what) {
    if (i < 1 || static_cast<std::size_t>(i) > horizon) {
        throw std::out_of_range(std::string(what) + " index " + std::to_string(i) +
                                " outside 1.." + std::to_string(horizon));
    }
}

void check_outcome(const RandomVariableFn& x, Outcome outcome) {
    if (static_cast<int>(outcome.size()) < x.horizon()) {
        throw ValidationError("outcome shorter than the random variable horizon");
    }
}

double root(int n) {
    if (n < 1) throw ValidationError("mesh parameter n must be >= 1");
    return std::sqrt(static_cast<double>(n));
}

// atoms^exponent, or 0 when it exceeds the enumeration limit.
std::size_t bounded_power(std::size_t base, int exponent) {
    std::size_t p = 1;
    for (int j = 0; j < exponent; ++j) {
        if (p > kEnumerationLimit / base) return 0;
        p *= base;
    }
    return p;
}

}  // namespace

double wick_exponential(const DiscreteKernel& f, Outcome outcome, int n) {
    if (f.order() != 1) throw ValidationError("Wick exponential needs an order-1 kernel");
    const double r = root(n);
    double prod = 1.0;
    for (const auto& [key, v] : f.entries()) {
        const int i = key[0];
        check_index(i, outcome.size(), "Wick exponential support");
        prod *= 1.0 + v * outcome[static_cast<std::size_t>(i - 1)] / r;
    }
    return prod;
}

double expectation_except(const RandomVariableFn& x, int i, Outcome outcome,
                          const NoiseSpec& spec) {
    check_outcome(x, outcome);
    check_index(i, outcome.size(), "conditioning");
    std::vector<double> omega(outcome.begin(), outcome.end());
    double s = 0.0;
    for (const auto& a : spec.atoms()) {
        omega[static_cast<std::size_t>(i - 1)] = a.value;
        s += a.probability * x(omega);
    }
    return s;
}

double malliavin_derivative(const RandomVariableFn& x, int i, Outcome outcome,
                            const NoiseSpec& spec, int n) {
    check_outcome(x, outcome);
    check_index(i, outcome.size(), "Malliavin");
    const double r = root(n);
    std::vector<double> omega(outcome.begin(), outcome.end());
    double s = 0.0;
    for (const auto& a : spec.atoms()) {
        omega[static_cast<std::size_t>(i - 1)] = a.value;
        s += a.probability * a.value * x(omega);
    }
    return r * s;
}

double malliavin_derivative_binary(const RandomVariableFn& x, int i, Outcome outcome, double b,
                                   int n) {
    check_outcome(x, outcome);
    check_index(i, outcome.size(), "Malliavin");
    if (!(b > 0.0)) throw ValidationError("b must be positive");
    const double r = root(n);
    std::vector<double> omega(outcome.begin(), outcome.end());
    omega[static_cast<std::size_t>(i - 1)] = b;
    const double hi = x(omega);
    omega[static_cast<std::size_t>(i - 1)] = -1.0 / b;
    const double lo = x(omega);
    return r * b / (b * b + 1.0) * (hi - lo);
}

double skorokhod_integral(const DiscreteProcessFn& z, int upto, Outcome outcome,
                          const NoiseSpec& spec, int n) {
    if (upto > z.horizon()) throw ValidationError("Skorokhod range N exceeds the horizon M");
    const double r = root(n);
    double s = 0.0;
    for (int i = 1; i <= upto; ++i) {
        s += expectation_except(z.component(i), i, outcome, spec) *
             outcome[static_cast<std::size_t>(i - 1)];
    }
    return s / r;
}

double skorokhod_integral_binary(const DiscreteProcessFn& z, int upto, Outcome outcome, double b,
                                 int n) {
    if (upto > z.horizon()) throw ValidationError("Skorokhod range N exceeds the horizon M");
    const double r = root(n);
    double ito_part = 0.0;
    double correction = 0.0;
    for (int i = 1; i <= upto; ++i) {
        const auto& zi = z.component(i);
        const double xi = outcome[static_cast<std::size_t>(i - 1)];
        ito_part += zi(outcome) * xi;
        correction += xi * xi * malliavin_derivative_binary(zi, i, outcome, b, n);
    }
    return ito_part / r - correction / static_cast<double>(n);
}

double ito_integral(const DiscreteProcessFn& z, const WalkPath& path) {
    if (!z.predictable()) throw ValidationError("Ito integral needs a predictable integrand");
    if (path.horizon() < static_cast<std::size_t>(z.horizon())) {
        throw ValidationError("walk path shorter than the integrand horizon");
    }
    const double r = root(path.n);
    const Outcome omega(path.increments);
    double s = 0.0;
    for (int i = 1; i <= z.horizon(); ++i) {
        s += z.component(i)(omega) * path.increments[static_cast<std::size_t>(i - 1)];
    }
    return s / r;
}

bool clark_ocone_exact_feasible(const NoiseSpec& spec, int horizon, int i) {
    return bounded_power(spec.atom_count(), horizon - i + 1) != 0;
}

double clark_ocone(const RandomVariableFn& x, int i, std::span<const double> prefix,
                   const NoiseSpec& spec, int n) {
    const int m = x.horizon();
    check_index(i, static_cast<std::size_t>(m), "Clark-Ocone");
    if (static_cast<int>(prefix.size()) < i - 1) throw ValidationError("prefix too short");
    const double r = root(n);
    const auto& atoms = spec.atoms();
    const std::size_t count = bounded_power(atoms.size(), m - i + 1);
    if (count == 0) {
        throw CostGuardError("exact Clark-Ocone derivative would enumerate more than 2^24 suffixes");
    }
    std::vector<double> omega(static_cast<std::size_t>(m));
    std::copy(prefix.begin(), prefix.begin() + (i - 1), omega.begin());
    double s = 0.0;
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t rest = idx;
        double w = 1.0;
        for (int c = i - 1; c < m; ++c) {
            const auto& a = atoms[rest % atoms.size()];
            rest /= atoms.size();
            omega[static_cast<std::size_t>(c)] = a.value;
            w *= a.probability;
        }
        s += w * omega[static_cast<std::size_t>(i - 1)] * x(omega);
    }
    return r * s;
}

Estimate clark_ocone_mc(const RandomVariableFn& x, int i, std::span<const double> prefix,
                        const NoiseSpec& spec, int n, std::size_t samples, Rng& rng) {
    const int m = x.horizon();
    check_index(i, static_cast<std::size_t>(m), "Clark-Ocone");
    if (static_cast<int>(prefix.size()) < i - 1) throw ValidationError("prefix too short");
    if (samples < 2) throw ValidationError("nested Monte Carlo needs at least 2 samples");
    const double r = root(n);
    std::vector<double> omega(static_cast<std::size_t>(m));
    std::copy(prefix.begin(), prefix.begin() + (i - 1), omega.begin());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (int c = i; c < m; ++c) omega[static_cast<std::size_t>(c)] = draw(spec, rng);
        double y = 0.0;
        for (const auto& a : spec.atoms()) {
            omega[static_cast<std::size_t>(i - 1)] = a.value;
            y += a.probability * a.value * x(omega);
        }
        sum += y;
        sum_sq += y * y;
    }
    const double count = static_cast<double>(samples);
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
    return {r * mean, r * std::sqrt(var / count)};
}

Estimate s_transform_estimate(const RandomVariableFn& x, const StepFunction& g, int n,
                              const NoiseSpec& spec, std::size_t paths, Rng& rng) {
    if (paths < 2) throw ValidationError("S-transform estimate needs at least 2 paths");
    const DiscreteKernel g_check = discretize(g, n);
    const auto m = static_cast<std::size_t>(std::max(x.horizon(), g_check.max_index()));
    std::vector<double> omega(m);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        for (auto& v : omega) v = draw(spec, rng);
        const double y = x(omega) * wick_exponential(g_check, omega, n);
        sum += y;
        sum_sq += y * y;
    }
    const double count = static_cast<double>(paths);
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
    return {mean, std::sqrt(var / count)};
}

bool spot_check_predictable(const DiscreteProcessFn& z, const NoiseSpec& spec, Rng& rng,
                            int trials) {
    const auto m = static_cast<std::size_t>(z.horizon());
    for (int t = 0; t < trials; ++t) {
        const std::vector<double> base = sample(spec, rng, m);
        for (int i = 1; i <= z.horizon(); ++i) {
            std::vector<double> moved = base;
            for (std::size_t c = static_cast<std::size_t>(i - 1); c < m; ++c) {
                moved[c] = draw(spec, rng);
            }
            if (z.component(i)(base) != z.component(i)(moved)) return false;
        }
    }
    return true;
}

}  // namespace malcal::lattice
