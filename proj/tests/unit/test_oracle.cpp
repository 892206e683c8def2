#include <cmath>

#include <gtest/gtest.h>

#include "malcal/errors.hpp"
#include "malcal/lattice.hpp"
#include "malcal/oracle.hpp"

using namespace malcal;

namespace {

RandomVariableFn basis(int m, std::vector<int> subset) {
    return RandomVariableFn(m, [subset](Outcome w) {
        double p = 1.0;
        for (int i : subset) p *= w[i - 1];
        return p;
    });
}

}  // namespace

TEST(Oracle, SpaceShape) {
    const oracle::EnumeratedSpace s(binary_noise(2.0), 3);
    EXPECT_EQ(s.size(), 8u);
    double total = 0.0;
    s.for_each([&](Outcome, double w) { total += w; });
    EXPECT_NEAR(total, 1.0, 1e-12);
    // little-endian: coordinate 1 is the fastest digit
    EXPECT_EQ(s.outcome(1), (std::vector<double>{2.0, -0.5, -0.5}));
    EXPECT_EQ(s.index_of(std::vector<double>{-0.5, 2.0, -0.5}), 2u);
    const oracle::EnumeratedSpace three(
        custom_noise({{-std::sqrt(2.0), 0.25}, {0.0, 0.5}, {std::sqrt(2.0), 0.25}}), 2);
    EXPECT_EQ(three.size(), 9u);
}

TEST(Oracle, WalshBasisIsOrthonormal) {
    const int m = 3;
    const oracle::EnumeratedSpace s(binary_noise(2.0), m);
    const std::vector<std::vector<int>> subsets{{}, {1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}, {1, 2, 3}};
    for (const auto& a : subsets) {
        if (!a.empty()) {
            EXPECT_NEAR(oracle::expectation(s, basis(m, a)), 0.0, 1e-15);
        }
        for (const auto& b : subsets) {
            const RandomVariableFn xa = basis(m, a), xb = basis(m, b);
            const RandomVariableFn prod(m, [&](Outcome w) { return xa(w) * xb(w); });
            EXPECT_NEAR(oracle::expectation(s, prod), a == b ? 1.0 : 0.0, 1e-14);
        }
    }
}

TEST(Oracle, WickSecondMoment) {
    Rng rng = make_stream(4, 0, 0);
    for (double b : {1.0, 3.0}) {
        const oracle::EnumeratedSpace s(binary_noise(b), 6);
        std::vector<double> fv(6);
        for (auto& v : fv) v = standard_normal(rng);
        const int n = 3;
        const DiscreteKernel f = DiscreteKernel::from_values(n, fv);
        const RandomVariableFn sq(6, [&](Outcome w) {
            const double e = lattice::wick_exponential(f, w, n);
            return e * e;
        });
        double expected = 1.0;
        for (double v : fv) expected *= 1.0 + v * v / n;
        EXPECT_NEAR(oracle::expectation(s, sq), expected, 1e-12 * expected);
    }
}

TEST(Oracle, ConditionalExpectation) {
    const oracle::EnumeratedSpace s(binary_noise(2.0), 3);
    const RandomVariableFn x(3, [](Outcome w) { return w[0] * w[1] + w[2] * w[2]; });
    const std::vector<double> at{2.0, -0.5, 2.0};
    const int all[] = {1, 2, 3};
    EXPECT_NEAR(oracle::conditional_expectation(s, x, all, at), x(at), 1e-15);
    EXPECT_NEAR(oracle::conditional_expectation(s, x, {}, {}), oracle::expectation(s, x), 1e-15);
    EXPECT_NEAR(oracle::expectation(s, x), 1.0, 1e-15);
    const int second[] = {2};
    const RandomVariableFn y(3, [](Outcome w) { return w[0] * w[1]; });
    for (double a : {-0.5, 2.0}) {
        const double av[] = {a};
        EXPECT_NEAR(oracle::conditional_expectation(s, y, second, av), 0.0, 1e-15);
    }
    const double bad[] = {1.0};
    EXPECT_THROW(oracle::conditional_expectation(s, y, second, bad), ValidationError);
}

TEST(Oracle, ThreeAtomMoments) {
    const oracle::EnumeratedSpace s(
        custom_noise({{-std::sqrt(2.0), 0.25}, {0.0, 0.5}, {std::sqrt(2.0), 0.25}}), 2);
    const RandomVariableFn x4(2, [](Outcome w) { return std::pow(w[0], 4); });
    EXPECT_NEAR(oracle::expectation(s, x4), 2.0, 1e-14);
    const RandomVariableFn sq(2, [](Outcome w) { return (w[0] + w[1]) * (w[0] + w[1]); });
    EXPECT_NEAR(oracle::expectation(s, sq), 2.0, 1e-14);
}

TEST(Oracle, CostGuard) {
    EXPECT_THROW(oracle::EnumeratedSpace(binary_noise(1.0), 25), CostGuardError);
    EXPECT_NO_THROW(oracle::EnumeratedSpace(binary_noise(1.0), 24));
}

TEST(Oracle, SkorokhodOfDeterministicIntegrandIsItoSum) {
    const int m = 4, n = 2;
    const oracle::EnumeratedSpace s(binary_noise(2.0), m);
    std::vector<RandomVariableFn> comps;
    for (int i = 1; i <= m; ++i) comps.emplace_back(m, [i](Outcome) { return 0.5 * i; });
    const DiscreteProcessFn z(std::move(comps), true);
    s.for_each([&](Outcome w, double) {
        double ito = 0.0;
        for (int i = 1; i <= m; ++i) ito += 0.5 * i * w[i - 1] / std::sqrt(double(n));
        EXPECT_NEAR(oracle::skorokhod(s, z, m, w, n), ito, 1e-14);
    });
}

TEST(Oracle, OperatorsOnProductOfTwo) {
    // X = xi_1 xi_2 with n = 1, b = 1
    const oracle::EnumeratedSpace s(binary_noise(1.0), 2);
    const RandomVariableFn x = basis(2, {1, 2});
    s.for_each([&](Outcome w, double) {
        EXPECT_NEAR(oracle::malliavin(s, x, 1, w, 1), w[1], 1e-15);
        EXPECT_NEAR(oracle::clark_ocone(s, x, 1, w.first(0), 1), 0.0, 1e-15);
        EXPECT_NEAR(oracle::clark_ocone(s, x, 2, w.first(1), 1), w[0], 1e-15);
    });
}
