#include <cmath>

#include <gtest/gtest.h>

#include "malcal/errors.hpp"
#include "malcal/lattice.hpp"
#include "malcal/oracle.hpp"

using namespace malcal;

namespace {

RandomVariableFn constant(int m, double c) {
    return RandomVariableFn(m, [c](Outcome) { return c; });
}

RandomVariableFn coordinate(int m, int i) {
    return RandomVariableFn(m, [i](Outcome w) { return w[i - 1]; });
}

RandomVariableFn product12(int m) {
    return RandomVariableFn(m, [](Outcome w) { return w[0] * w[1]; });
}

// Z_i = B^n_{(i-1)/n}
DiscreteProcessFn lagged_walk(int m, int n) {
    std::vector<RandomVariableFn> comps;
    for (int i = 1; i <= m; ++i) {
        comps.emplace_back(m, [i, n](Outcome w) {
            double s = 0.0;
            for (int j = 0; j < i - 1; ++j) s += w[j];
            return s / std::sqrt(double(n));
        });
    }
    return DiscreteProcessFn(std::move(comps), true);
}

}  // namespace

TEST(Lattice, WickExponentialExamples) {
    const std::vector<double> w{1.0, 1.0};
    EXPECT_EQ(lattice::wick_exponential(DiscreteKernel(1, 1), w, 1), 1.0);
    const DiscreteKernel f = DiscreteKernel::from_values(1, std::vector<double>{1.0, 1.0});
    EXPECT_DOUBLE_EQ(lattice::wick_exponential(f, w, 1), 4.0);
    const oracle::EnumeratedSpace s(binary_noise(1.0), 2);
    const RandomVariableFn sq(2, [&](Outcome o) {
        const double e = lattice::wick_exponential(f, o, 1);
        return e * e;
    });
    EXPECT_DOUBLE_EQ(oracle::expectation(s, sq), 4.0);
    const DiscreteKernel far = DiscreteKernel::from_values(1, std::vector<double>{0, 0, 1});
    EXPECT_THROW(lattice::wick_exponential(far, w, 1), std::out_of_range);
}

TEST(Lattice, MalliavinExamples) {
    const NoiseSpec spec = binary_noise(1.0);
    const oracle::EnumeratedSpace s(spec, 2);
    s.for_each([&](Outcome w, double) {
        EXPECT_EQ(lattice::malliavin_derivative(constant(2, 3.0), 1, w, spec, 1), 0.0);
        EXPECT_NEAR(lattice::malliavin_derivative(product12(2), 1, w, spec, 1), w[1], 1e-15);
    });
    const std::vector<double> w{1.0, -1.0};
    EXPECT_THROW(lattice::malliavin_derivative(product12(2), 3, w, spec, 1), std::out_of_range);
    EXPECT_THROW(lattice::malliavin_derivative(product12(2), 0, w, spec, 1), std::out_of_range);
}

TEST(Lattice, MalliavinOfWickExponential) {
    for (double b : {1.0, 2.0}) {
        const NoiseSpec spec = binary_noise(b);
        const int m = 4, n = 3;
        const DiscreteKernel f = DiscreteKernel::from_values(n, std::vector<double>{0.5, -1.0, 2.0, 0.3});
        const RandomVariableFn x(m, [&](Outcome w) { return lattice::wick_exponential(f, w, n); });
        const oracle::EnumeratedSpace s(spec, m);
        for (int i = 1; i <= m; ++i) {
            DiscreteKernel rest = f;
            const int idx[] = {i};
            const double fi = f.value(idx);
            rest.set(idx, 0.0);
            s.for_each([&](Outcome w, double) {
                const double expected = fi * lattice::wick_exponential(rest, w, n);
                EXPECT_NEAR(lattice::malliavin_derivative(x, i, w, spec, n), expected, 1e-12);
                EXPECT_NEAR(lattice::malliavin_derivative_binary(x, i, w, b, n), expected, 1e-12);
            });
        }
    }
}

TEST(Lattice, SkorokhodExamples) {
    const NoiseSpec spec = binary_noise(1.0);
    const int m = 2, n = 1;
    std::vector<RandomVariableFn> ones{constant(m, 1.0), constant(m, 1.0)};
    const DiscreteProcessFn one(ones);
    const DiscreteProcessFn self({coordinate(m, 1), coordinate(m, 2)});
    const DiscreteProcessFn swapped({coordinate(m, 2), coordinate(m, 1)});
    const oracle::EnumeratedSpace s(spec, m);
    s.for_each([&](Outcome w, double) {
        EXPECT_NEAR(lattice::skorokhod_integral(one, 2, w, spec, n), w[0] + w[1], 1e-15);
        EXPECT_NEAR(lattice::skorokhod_integral(self, 2, w, spec, n), 0.0, 1e-15);
        EXPECT_NEAR(lattice::skorokhod_integral(swapped, 2, w, spec, n), 2 * w[0] * w[1], 1e-15);
        EXPECT_NEAR(lattice::skorokhod_integral_binary(swapped, 2, w, 1.0, n), 2 * w[0] * w[1], 1e-15);
    });
    const std::vector<double> w{1.0, 1.0};
    EXPECT_THROW(lattice::skorokhod_integral(one, 3, w, spec, n), ValidationError);
}

TEST(Lattice, ItoIntegral) {
    const int m = 6, n = 4;
    const NoiseSpec spec = binary_noise(2.0);
    Rng rng = make_stream(3, 0, 0);
    const WalkPath path = simulate_walk(spec, n, m, rng);
    std::vector<RandomVariableFn> ones(m, constant(m, 1.0));
    const DiscreteProcessFn one(ones, true);
    EXPECT_NEAR(lattice::ito_integral(one, path), walk_value(path, double(m) / n), 1e-14);

    const DiscreteProcessFn lag = lagged_walk(m, n);
    double sq = 0.0;
    for (double x : path.increments) sq += x * x;
    const double end = walk_value(path, double(m) / n);
    EXPECT_NEAR(lattice::ito_integral(lag, path), (end * end - sq / n) / 2.0, 1e-13);

    const DiscreteProcessFn not_predictable(ones, false);
    EXPECT_THROW(lattice::ito_integral(not_predictable, path), ValidationError);
}

TEST(Lattice, ItoIsometry) {
    const int m = 8, n = 3;
    const NoiseSpec spec = binary_noise(2.0);
    const oracle::EnumeratedSpace s(spec, m);
    const DiscreteProcessFn lag = lagged_walk(m, n);
    const RandomVariableFn sq(m, [&](Outcome w) {
        WalkPath p;
        p.n = n;
        p.increments.assign(w.begin(), w.end());
        const double v = lattice::ito_integral(lag, p);
        return v * v;
    });
    double rhs = 0.0;
    for (int i = 1; i <= m; ++i) {
        const RandomVariableFn zi2(m, [&, i](Outcome w) {
            const double z = lag.component(i)(w);
            return z * z;
        });
        rhs += oracle::expectation(s, zi2) / n;
    }
    EXPECT_NEAR(oracle::expectation(s, sq), rhs, 1e-12);
}

TEST(Lattice, ClarkOconeExamples) {
    const NoiseSpec spec = binary_noise(1.0);
    const RandomVariableFn x = product12(2);
    const oracle::EnumeratedSpace s(spec, 2);
    double energy = 0.0;
    s.for_each([&](Outcome w, double p) {
        EXPECT_NEAR(lattice::clark_ocone(x, 1, w.first(0), spec, 1), 0.0, 1e-15);
        const double d2 = lattice::clark_ocone(x, 2, w.first(1), spec, 1);
        EXPECT_NEAR(d2, w[0], 1e-15);
        energy += p * d2 * d2;
    });
    EXPECT_NEAR(energy, 1.0, 1e-15);  // equals Var(X)
}

TEST(Lattice, ClarkOconeOfWickExponential) {
    const double b = 2.0;
    const NoiseSpec spec = binary_noise(b);
    const int m = 5, n = 2;
    const DiscreteKernel f = DiscreteKernel::from_values(n, std::vector<double>{1.0, -0.5, 0.25, 2.0, 1.5});
    const RandomVariableFn x(m, [&](Outcome w) { return lattice::wick_exponential(f, w, n); });
    Rng rng = make_stream(5, 0, 0);
    const std::vector<double> w = sample(spec, rng, m);
    for (int i = 1; i <= m; ++i) {
        DiscreteKernel head(1, n);
        for (int j = 1; j < i; ++j) {
            const int idx[] = {j};
            head.set(idx, f.value(idx));
        }
        const int ii[] = {i};
        const double expected = f.value(ii) * lattice::wick_exponential(head, w, n);
        EXPECT_NEAR(lattice::clark_ocone(x, i, std::span(w).first(i - 1), spec, n), expected, 1e-12);
    }
}

TEST(Lattice, ClarkOconeContraction) {
    const NoiseSpec spec = binary_noise(2.0);
    const int m = 5, n = 2;
    const oracle::EnumeratedSpace s(spec, m);
    const RandomVariableFn x(m, [](Outcome w) { return std::sin(w[0] + 2 * w[3]) * w[4] + w[1] * w[1]; });
    const double mean = oracle::expectation(s, x);
    const RandomVariableFn sq(m, [&](Outcome w) { return (x(w) - mean) * (x(w) - mean); });
    double energy = 0.0;
    for (int i = 1; i <= m; ++i) {
        const RandomVariableFn d2(m, [&, i](Outcome w) {
            const double v = lattice::clark_ocone(x, i, w.first(i - 1), spec, n);
            return v * v;
        });
        energy += oracle::expectation(s, d2) / n;
    }
    EXPECT_LE(energy, oracle::expectation(s, sq) + 1e-12);
}

TEST(Lattice, ClarkOconeCostGuardAndMonteCarlo) {
    const NoiseSpec spec = binary_noise(1.0);
    const int m = 30, n = 30;
    const RandomVariableFn x(m, [](Outcome w) {
        double s = 0.0;
        for (double v : w) s += v;
        return s * s / 30.0;
    });
    const std::vector<double> prefix(3, 1.0);
    EXPECT_FALSE(lattice::clark_ocone_exact_feasible(spec, m, 4));
    EXPECT_TRUE(lattice::clark_ocone_exact_feasible(spec, m, 8));
    EXPECT_THROW(lattice::clark_ocone(x, 4, prefix, spec, n), CostGuardError);
    Rng rng = make_stream(6, 0, 0);
    const auto est = lattice::clark_ocone_mc(x, 4, prefix, spec, n, 4000, rng);
    // sqrt(n) E[xi_4 (S_3 + xi_4 + rest)^2] / n = 2 S_3 / sqrt(n) for b = 1
    EXPECT_NEAR(est.value, 2.0 * 3.0 / std::sqrt(30.0), 4.0 * est.std_error + 1e-12);
}

TEST(Lattice, SkorokhodOfPredictableIsItoForThreeAtoms) {
    // The generic operator reduces to the Ito sum for predictable input under any atoms.
    const NoiseSpec spec = custom_noise({{-std::sqrt(2.0), 0.25}, {0.0, 0.5}, {std::sqrt(2.0), 0.25}});
    const int m = 4, n = 2;
    const DiscreteProcessFn lag = lagged_walk(m, n);
    const oracle::EnumeratedSpace s(spec, m);
    s.for_each([&](Outcome w, double) {
        WalkPath p;
        p.n = n;
        p.increments.assign(w.begin(), w.end());
        EXPECT_NEAR(lattice::skorokhod_integral(lag, m, w, spec, n), lattice::ito_integral(lag, p), 1e-14);
        EXPECT_NEAR(lattice::skorokhod_integral(lag, m, w, spec, n), oracle::skorokhod(s, lag, m, w, n), 1e-14);
    });
}

TEST(Lattice, STransformEstimates) {
    const NoiseSpec spec = binary_noise(1.0);
    Rng rng = make_stream(7, 0, 0);
    const auto one = lattice::s_transform_estimate(constant(1, 1.0), StepFunction::indicator(0, 1), 4,
                                                   spec, 20000, rng);
    EXPECT_NEAR(one.value, 1.0, 3.0 * one.std_error);
    const int n = 2;
    const DiscreteKernel h = discretize(StepFunction::indicator(0, 1), n);
    const RandomVariableFn x(2, [&](Outcome w) { return lattice::wick_exponential(h, w, n); });
    const auto est = lattice::s_transform_estimate(x, StepFunction::indicator(0, 1), n, spec, 20000, rng);
    EXPECT_NEAR(est.value, 2.25, 3.0 * est.std_error);
}

TEST(Lattice, PredictableSpotCheck) {
    const NoiseSpec spec = binary_noise(2.0);
    Rng rng = make_stream(8, 0, 0);
    EXPECT_TRUE(lattice::spot_check_predictable(lagged_walk(5, 2), spec, rng));
    std::vector<RandomVariableFn> comps;
    for (int i = 1; i <= 5; ++i) comps.push_back(coordinate(5, i));
    EXPECT_FALSE(lattice::spot_check_predictable(DiscreteProcessFn(comps), spec, rng));
}
