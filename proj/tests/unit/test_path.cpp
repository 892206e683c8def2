#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "malcal/errors.hpp"
#include "malcal/path.hpp"

using namespace malcal;

namespace {

WalkPath hand_path() {
    WalkPath p;
    p.n = 4;
    p.increments = {1.0, -1.0, 1.0, 1.0};
    return p;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST(Walk, HandValues) {
    const WalkPath p = hand_path();
    EXPECT_DOUBLE_EQ(walk_value(p, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(walk_value(p, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(walk_value(p, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(walk_value(p, 0.3), 0.5);  // floor(1.2) = 1
    EXPECT_THROW(walk_value(p, 1.25), std::out_of_range);
}

TEST(Walk, NeedsIncrements) {
    Rng rng = make_stream(1, 0, 0);
    EXPECT_THROW(simulate_walk(binary_noise(1.0), 4, 0, rng), ValidationError);
}

TEST(Walk, SecondMomentOfEndpoint) {
    const NoiseSpec spec = binary_noise(2.0);
    double s = 0.0;
    const int paths = 100000;
    for (int p = 0; p < paths; ++p) {
        Rng rng = make_stream(3, 0, static_cast<std::uint64_t>(p));
        const WalkPath w = simulate_walk(spec, 16, 16, rng);
        const double v = walk_value(w, 1.0);
        s += v * v;
    }
    EXPECT_NEAR(s / paths, 1.0, 0.02);
}

TEST(Coupling, IncrementsAreBarrierValues) {
    const int n = 16;
    const std::vector<double> times{0.5, 1.0};
    for (double b : {1.0, 2.0}) {
        Rng rng = make_stream(5, 0, 0);
        const CoupledPath c = simulate_coupled_binary(b, n, 64, times, rng);
        ASSERT_EQ(c.walk.increments.size(), 64u);
        ASSERT_EQ(c.bm_values.size(), 2u);
        for (double xi : c.walk.increments) EXPECT_TRUE(xi == b || xi == -1.0 / b);
        EXPECT_TRUE(std::is_sorted(c.passage_times.begin(), c.passage_times.end()));
        EXPECT_GT(c.passage_times.front(), 0.0);
    }
}

TEST(Coupling, OvershootStaysWithinGridBound) {
    const int n = 64;
    const int k = 64;
    const double bound = 6.0 * std::sqrt(1.0 / (static_cast<double>(k) * n));
    std::size_t total = 0, bad = 0;
    for (int p = 0; p < 200; ++p) {
        Rng rng = make_stream(6, 0, static_cast<std::uint64_t>(p));
        const CoupledPath c = simulate_coupled_binary(1.0, n, n, {}, rng, {k, 0.0});
        double prev = 0.0;
        for (std::size_t i = 0; i < c.walk.increments.size(); ++i) {
            const double jump = c.passage_values[i] - prev;
            if (std::abs(jump - c.walk.increments[i] / std::sqrt(double(n))) > bound) ++bad;
            prev = c.passage_values[i];
            ++total;
        }
    }
    EXPECT_LE(bad, std::max<std::size_t>(1, total / 10000));
}

TEST(Coupling, FirstPassageMeanAndSide) {
    // E[tau_1] = alpha beta = 1/n; grid times carry a bias of about dt/2.
    const int n = 8;
    const int k = 256;
    const int paths = 100000;
    double s = 0.0, s2 = 0.0;
    int upper = 0;
    for (int p = 0; p < paths; ++p) {
        Rng rng = make_stream(7, 0, static_cast<std::uint64_t>(p));
        const CoupledPath c = simulate_coupled_binary(2.0, n, 1, {}, rng, {k, 0.0});
        s += c.passage_times[0];
        s2 += c.passage_times[0] * c.passage_times[0];
        upper += c.walk.increments[0] > 0.0;
    }
    const double mean = s / paths;
    const double se = std::sqrt((s2 / paths - mean * mean) / paths);
    const double dt = 1.0 / (static_cast<double>(k) * n);
    EXPECT_NEAR(mean, 1.0 / n, dt / 2 + 4.0 * se);
    EXPECT_NEAR(static_cast<double>(upper) / paths, 0.2, 0.01);
}

TEST(Coupling, BrownianValuesHaveUnitVariance) {
    const int paths = 20000;
    double s = 0.0;
    for (int p = 0; p < paths; ++p) {
        Rng rng = make_stream(8, 0, static_cast<std::uint64_t>(p));
        const CoupledPath c = simulate_coupled_binary(1.0, 8, 8, std::vector<double>{1.0}, rng, {16, 0.0});
        s += c.bm_values[0] * c.bm_values[0];
    }
    EXPECT_NEAR(s / paths, 1.0, 0.05);
}

TEST(Coupling, UnderrunIsReported) {
    Rng rng = make_stream(9, 0, 0);
    try {
        simulate_coupled_binary(1.0, 1, 100, {}, rng, {8, 0.01});
        FAIL() << "expected an under-run";
    } catch (const CouplingUnderrun& e) {
        EXPECT_LT(e.achieved(), 100u);
        EXPECT_EQ(e.required(), 100u);
    }
}

TEST(Coupling, RejectsCoarseGrid) {
    Rng rng = make_stream(9, 0, 0);
    EXPECT_THROW(simulate_coupled_binary(1.0, 4, 4, {}, rng, {4, 0.0}), ValidationError);
}

TEST(Coupling, DeterministicPerStream) {
    Rng a = make_stream(11, 2, 3);
    Rng b = make_stream(11, 2, 3);
    const std::vector<double> times{0.5, 1.0};
    const CoupledPath x = simulate_coupled_binary(1.0, 32, 32, times, a);
    const CoupledPath y = simulate_coupled_binary(1.0, 32, 32, times, b);
    EXPECT_EQ(x.walk.increments, y.walk.increments);
    EXPECT_EQ(x.bm_values, y.bm_values);
    EXPECT_EQ(x.passage_times, y.passage_times);
}

TEST(ExitSampler, SymmetricMean) {
    const int draws = 100000;
    double s = 0.0;
    int upper = 0;
    for (int j = 0; j < draws; ++j) {
        Rng rng = make_stream(12, 0, static_cast<std::uint64_t>(j));
        const ExitSample e = sample_exit(1.0, 1.0, rng);
        s += e.time;
        upper += e.upper;
    }
    EXPECT_NEAR(s / draws, 1.0, 0.02);
    EXPECT_NEAR(static_cast<double>(upper) / draws, 0.5, 0.01);
}

TEST(ExitSampler, AsymmetricSideAndMean) {
    // alpha = 1, beta = 4: P(upper) = 0.2, E[tau] = 4
    const int draws = 50000;
    double s = 0.0;
    int upper = 0;
    for (int j = 0; j < draws; ++j) {
        Rng rng = make_stream(13, 0, static_cast<std::uint64_t>(j));
        const ExitSample e = sample_exit(1.0, 4.0, rng);
        s += e.time;
        upper += e.upper;
    }
    EXPECT_NEAR(static_cast<double>(upper) / draws, 0.2, 0.01);
    EXPECT_NEAR(s / draws, 4.0, 0.15);
}

TEST(ExitSampler, DensityIntegratesToOne) {
    // Simpson on [0, 30]; the tail beyond carries mass below 1e-15.
    const int cells = 30000;
    const double h = 30.0 / cells;
    double s = 0.0;
    for (int j = 0; j <= cells; ++j) {
        const double w = (j == 0 || j == cells) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        s += w * exit_time_density(1.0, 1.0, j * h);
    }
    EXPECT_NEAR(s * h / 3.0, 1.0, 1e-8);
}

TEST(ExitSampler, TailMatchesDensity) {
    const int cells = 27000;
    const double h = 27.0 / cells;
    double tail = 0.0;
    for (int j = 0; j <= cells; ++j) {
        const double w = (j == 0 || j == cells) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        tail += w * exit_time_density(1.0, 1.0, 3.0 + j * h);
    }
    tail *= h / 3.0;
    const int draws = 100000;
    int above = 0;
    for (int j = 0; j < draws; ++j) {
        Rng rng = make_stream(14, 0, static_cast<std::uint64_t>(j));
        above += sample_exit(1.0, 1.0, rng).time > 3.0;
    }
    const double p = static_cast<double>(above) / draws;
    EXPECT_NEAR(p, tail, 3.0 * std::sqrt(tail * (1.0 - tail) / draws));
}

TEST(ExitSampler, BrownianScaling) {
    const int draws = 10000;
    std::vector<double> base, scaled;
    for (int j = 0; j < draws; ++j) {
        Rng a = make_stream(15, 0, static_cast<std::uint64_t>(j));
        Rng b = make_stream(15, 1, static_cast<std::uint64_t>(j));
        base.push_back(sample_first_passage_time(0.7, 1.3, a));
        scaled.push_back(sample_first_passage_time(2.1, 3.9, b) / 9.0);
    }
    EXPECT_LT(ks_statistic(base, scaled), 1.628 * std::sqrt(2.0 / draws));
}

TEST(ExitSampler, RejectsBadInput) {
    Rng rng = make_stream(1, 0, 0);
    EXPECT_THROW(sample_exit(0.0, 1.0, rng), ValidationError);
    EXPECT_THROW(sample_exit(1.0, 1.0, rng, 1e-3), ValidationError);
    EXPECT_THROW(sample_exit(1.0, 1.0, rng, 0.0), ValidationError);
}

TEST(Skeleton, ExactPassageTimes) {
    Rng rng = make_stream(16, 0, 0);
    const Skeleton s = simulate_skeleton_binary(2.0, 16, 100, rng);
    ASSERT_EQ(s.walk.increments.size(), 100u);
    ASSERT_EQ(s.passage_times.size(), 100u);
    for (double xi : s.walk.increments) EXPECT_TRUE(xi == 2.0 || xi == -0.5);
    for (std::size_t i = 1; i < 100; ++i) EXPECT_GT(s.passage_times[i], s.passage_times[i - 1]);
}

TEST(PathCsv, Format) {
    std::ostringstream os;
    const WalkPath p = hand_path();
    const std::vector<double> tau{0.25, 0.5, 0.75, 1.0};
    write_path_csv(os, p, tau, 1.0, 7);
    EXPECT_EQ(os.str(), "# n=4,b=1,seed=7\ni,xi,tau\n1,1,0.25\n2,-1,0.5\n3,1,0.75\n4,1,1\n");
}
