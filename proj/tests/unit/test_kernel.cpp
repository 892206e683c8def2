#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "malcal/errors.hpp"
#include "malcal/kernel.hpp"
#include "malcal/rng.hpp"

using namespace malcal;

namespace {

DiscreteKernel ones(int n) { return DiscreteKernel::from_values(n, std::vector<double>(n, 1.0)); }

DiscreteKernel random_kernel(int k, int n, int support, Rng& rng) {
    DiscreteKernel f(k, n);
    Index t(static_cast<std::size_t>(k), 1);
    for (;;) {
        f.set(t, standard_normal(rng));
        int d = k - 1;
        while (d >= 0 && t[d] == support) t[d--] = 1;
        if (d < 0) break;
        ++t[d];
    }
    return f;
}

}  // namespace

TEST(Kernel, DiscretizeIndicator) {
    const DiscreteKernel f = discretize(StepFunction::indicator(0.0, 1.0), 4);
    for (int i = 1; i <= 4; ++i) {
        const int idx[] = {i};
        EXPECT_EQ(f.value(idx), 1.0) << i;
    }
    const int five[] = {5};
    EXPECT_EQ(f.value(five), 0.0);
    EXPECT_EQ(f.entries().size(), 4u);
    EXPECT_TRUE(discretize(StepFunction(), 7).entries().empty());
}

TEST(Kernel, DiscretizationErrorBound) {
    const StepFunction g = StepFunction::parse("2:0:0.3;-1:0.5:0.77");
    for (int n : {3, 10, 100, 1000}) {
        const TensorStep target = TensorStep::tensor_power(g, 1);
        const double dist = embed(discretize(g, n)).distance(target);
        EXPECT_LE(dist, std::sqrt(2.0) * g.total_variation_of_levels() / std::sqrt(double(n))) << n;
    }
}

TEST(Kernel, EmbeddingNorms) {
    EXPECT_NEAR(embed(ones(8)).squared_norm(), 1.0, 1e-15);
    EXPECT_NEAR(embed(ones(8)).distance(TensorStep::cube(1, 0.0, 1.0)), 0.0, 1e-12);
    Rng rng = make_stream(1, 0, 0);
    for (int k = 1; k <= 3; ++k) {
        const DiscreteKernel f = random_kernel(k, 5, 4, rng);
        const EmbeddedKernel e = embed(f);
        EXPECT_NEAR(e.squared_norm(), e.as_step().squared_norm(), 1e-12);
        EXPECT_NEAR(e.squared_norm(), inner(f, f), 1e-12);
    }
}

TEST(Kernel, OffDiagonalOnesDistance) {
    for (int n : {4, 16, 64}) {
        DiscreteKernel f = remove_diagonal(tensor_power(ones(n), 2));
        EXPECT_NEAR(embed(f).distance(TensorStep::cube(2, 0.0, 1.0)), 1.0 / std::sqrt(double(n)), 1e-12);
    }
}

TEST(Kernel, DiagonalRemovalVanishes) {
    double prev = INFINITY;
    for (int n : {8, 32, 128}) {
        const DiscreteKernel full = tensor_power(discretize(StepFunction::indicator(0.0, 1.0), n), 2);
        const double d = embed(remove_diagonal(full)).distance(embed(full).as_step());
        EXPECT_LT(d, prev);
        EXPECT_NEAR(d, 1.0 / std::sqrt(double(n)), 1e-12);
        prev = d;
    }
}

TEST(Kernel, Symmetrize) {
    DiscreteKernel f(2, 1);
    const int a[] = {1, 2};
    const int b[] = {2, 1};
    f.set(a, 1.0);
    const DiscreteKernel s = symmetrize(f);
    EXPECT_DOUBLE_EQ(s.value(a), 0.5);
    EXPECT_DOUBLE_EQ(s.value(b), 0.5);
    const DiscreteKernel again = symmetrize(s);
    EXPECT_DOUBLE_EQ(again.value(a), 0.5);
    Rng rng = make_stream(2, 0, 0);
    for (int k = 1; k <= 3; ++k) {
        const DiscreteKernel g = random_kernel(k, 3, 3, rng);
        const DiscreteKernel gs = symmetrize(g);
        EXPECT_LE(gs.norm(), g.norm() + 1e-14);
        // idempotent, compared tuple by tuple
        const DiscreteKernel twice = symmetrize(difference(gs, DiscreteKernel(k, 3)));
        EXPECT_NEAR(difference(twice, gs).norm(), 0.0, 1e-14);
    }
}

TEST(Kernel, RemoveDiagonal) {
    const DiscreteKernel sq = tensor_power(ones(2), 2);
    const DiscreteKernel r = remove_diagonal(sq);
    const int d1[] = {1, 1}, d2[] = {2, 2}, off[] = {2, 1};
    EXPECT_EQ(r.value(d1), 0.0);
    EXPECT_EQ(r.value(d2), 0.0);
    EXPECT_EQ(r.value(off), 1.0);
    EXPECT_TRUE(r.off_diagonal());
    const DiscreteKernel one = ones(3);
    EXPECT_NEAR(difference(remove_diagonal(one), one).norm(), 0.0, 0.0);
}

TEST(Kernel, RemoveDiagonalCommutesWithSymmetrize) {
    Rng rng = make_stream(3, 0, 0);
    const DiscreteKernel g = random_kernel(3, 4, 3, rng);
    const DiscreteKernel a = symmetrize(remove_diagonal(g));
    const DiscreteKernel b = remove_diagonal(symmetrize(g));
    EXPECT_NEAR(difference(a, b).norm(), 0.0, 1e-14);
}

TEST(Kernel, TensorPower) {
    const DiscreteKernel f = DiscreteKernel::from_values(2, std::vector<double>{1.0, 1.0});
    const DiscreteKernel sq = tensor_power(f, 2);
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) {
            const int t[] = {i, j};
            EXPECT_EQ(sq.value(t), 1.0);
        }
    }
    const DiscreteKernel g = DiscreteKernel::from_values(3, std::vector<double>{0.5, -2.0, 3.0});
    const DiscreteKernel g3 = tensor_power(g, 3);
    const EmbeddedKernel eg = embed(g);
    const EmbeddedKernel eg3 = embed(g3);
    for (double u : {0.1, 0.4, 0.9}) {
        for (double v : {0.2, 0.5, 1.0}) {
            for (double w : {0.3, 0.7, 0.95}) {
                const double uu[] = {u}, vv[] = {v}, ww[] = {w}, all[] = {u, v, w};
                EXPECT_NEAR(eg(uu) * eg(vv) * eg(ww), eg3(all), 1e-14);
            }
        }
    }
    EXPECT_NEAR(difference(tensor_power(f, 1), f).norm(), 0.0, 0.0);
    EXPECT_THROW(tensor_power(ones(5000), 2), CostGuardError);
}

TEST(Kernel, SymmetricStorage) {
    DiscreteKernel f(3, 2, true);
    const int t[] = {2, 1, 1};
    const int u[] = {1, 2, 1};
    f.set(t, 4.0);
    EXPECT_EQ(f.value(u), 4.0);
    EXPECT_EQ(f.entries().size(), 1u);
    EXPECT_EQ(f.multiplicity(f.entries().begin()->first), 3u);
    EXPECT_NEAR(f.squared_norm(), 3 * 16.0 / 8.0, 1e-15);
}

TEST(Kernel, OffDiagonalRejectsDiagonal) {
    DiscreteKernel f(2, 2, true);
    f.mark_off_diagonal();
    const int d[] = {1, 1};
    EXPECT_THROW(f.set(d, 1.0), ValidationError);
    DiscreteKernel g(2, 2, true);
    g.set(d, 1.0);
    EXPECT_THROW(g.mark_off_diagonal(), ValidationError);
}

TEST(Kernel, ProcessKernel) {
    const std::vector<DiscreteKernel> family(3, ones(2));
    const DiscreteKernel p = process_kernel(family);
    EXPECT_EQ(p.order(), 2);
    for (int i = 1; i <= 3; ++i) {
        const int a[] = {1, i}, b[] = {2, i};
        EXPECT_EQ(p.value(a), 1.0);
        EXPECT_EQ(p.value(b), 1.0);
    }
}

TEST(Kernel, StepInnerProductsAgree) {
    const StepFunction g = StepFunction::parse("1:0:0.5;2:0.25:1");
    const StepFunction h = StepFunction::parse("-1:0.1:0.6;3:0.6:0.9");
    for (int n : {4, 10, 33}) {
        const DiscreteKernel gn = discretize(g, n), hn = discretize(h, n);
        EXPECT_NEAR(inner(gn, hn), embed(gn).inner(embed(hn).as_step()), 1e-12);
    }
    EXPECT_NEAR(g.inner(h), -0.4 - 2 * 0.35 + 6 * 0.3, 1e-12);
}

TEST(Kernel, CsvFormat) {
    DiscreteKernel f(2, 2, true);
    const int t[] = {1, 2};
    f.set(t, 0.5);
    std::ostringstream os;
    write_kernel_csv(os, f);
    EXPECT_EQ(os.str(), "i1,i2,value\n1,2,0.5\n2,1,0.5\n");
}

TEST(Kernel, ParseErrors) {
    EXPECT_THROW(StepFunction::parse("1:0"), ValidationError);
    EXPECT_THROW(StepFunction::parse("x:0:1"), ValidationError);
}
