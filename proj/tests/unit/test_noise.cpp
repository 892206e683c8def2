#include <cmath>

#include <gtest/gtest.h>

#include "malcal/errors.hpp"
#include "malcal/noise.hpp"

using namespace malcal;

TEST(Noise, BinaryOneIsSymmetric) {
    const NoiseSpec s = binary_noise(1.0);
    ASSERT_EQ(s.atom_count(), 2u);
    EXPECT_DOUBLE_EQ(s.atoms()[0].value, -1.0);
    EXPECT_DOUBLE_EQ(s.atoms()[0].probability, 0.5);
    EXPECT_DOUBLE_EQ(s.atoms()[1].value, 1.0);
    EXPECT_DOUBLE_EQ(s.atoms()[1].probability, 0.5);
}

TEST(Noise, BinaryTwoAtoms) {
    const NoiseSpec s = binary_noise(2.0);
    EXPECT_DOUBLE_EQ(s.atoms()[0].value, -0.5);
    EXPECT_NEAR(s.atoms()[0].probability, 0.8, 1e-15);
    EXPECT_DOUBLE_EQ(s.atoms()[1].value, 2.0);
    EXPECT_NEAR(s.atoms()[1].probability, 0.2, 1e-15);
    EXPECT_TRUE(s.is_binary());
    EXPECT_DOUBLE_EQ(s.binary_b(), 2.0);
}

TEST(Noise, MomentsForAnyB) {
    for (double b : {0.3, 1.0, 2.0, 7.5}) {
        const NoiseSpec s = binary_noise(b);
        EXPECT_NEAR(s.moment(1), 0.0, 1e-12);
        EXPECT_NEAR(s.moment(2), 1.0, 1e-12);
        // xi^2 = 1 + (b - 1/b) xi at both atoms
        for (const auto& a : s.atoms()) {
            EXPECT_NEAR(a.value * a.value, 1.0 + (b - 1.0 / b) * a.value, 1e-12);
        }
    }
}

TEST(Noise, RejectsBadB) {
    EXPECT_THROW(binary_noise(0.0), ValidationError);
    EXPECT_THROW(binary_noise(-1.0), ValidationError);
    EXPECT_THROW(binary_noise(std::nan("")), ValidationError);
    EXPECT_THROW(binary_noise(INFINITY), ValidationError);
}

TEST(Noise, CustomValid) {
    EXPECT_NO_THROW(custom_noise({{-1.0, 0.5}, {1.0, 0.5}}));
    const NoiseSpec three = custom_noise({{std::sqrt(2.0), 0.25}, {0.0, 0.5}, {-std::sqrt(2.0), 0.25}});
    EXPECT_EQ(three.atom_count(), 3u);
    EXPECT_LT(three.atoms()[0].value, three.atoms()[1].value);
    EXPECT_FALSE(three.is_binary());
}

TEST(Noise, CustomErrorsNameTheInvariant) {
    try {
        custom_noise({{-1.0, 0.5}, {2.0, 0.5}});
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("mean"), std::string::npos) << e.what();
    }
    try {
        custom_noise({{-2.0, 0.5}, {2.0, 0.5}});
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("variance"), std::string::npos) << e.what();
    }
    EXPECT_THROW(custom_noise({{1.0, 1.0}}), ValidationError);
    EXPECT_THROW(custom_noise({{-1.0, 0.6}, {1.0, 0.5}}), ValidationError);
    EXPECT_THROW(custom_noise({{-1.0, 0.0}, {1.0, 1.0}}), ValidationError);
    EXPECT_THROW(custom_noise({{1.0, 0.5}, {1.0, 0.5}}), ValidationError);
}

TEST(Noise, SamplingIsReproducible) {
    const NoiseSpec s = binary_noise(1.0);
    Rng a = make_stream(9, 1, 2);
    Rng b = make_stream(9, 1, 2);
    EXPECT_EQ(sample(s, a, 64), sample(s, b, 64));
}

TEST(Noise, EmpiricalMomentsOfBinaryTwo) {
    const NoiseSpec s = binary_noise(2.0);
    Rng rng = make_stream(1, 0, 0);
    const auto xs = sample(s, rng, 1000000);
    double m1 = 0.0, m2 = 0.0;
    for (double x : xs) {
        m1 += x;
        m2 += x * x;
        ASSERT_TRUE(x == 2.0 || x == -0.5);
    }
    m1 /= xs.size();
    m2 /= xs.size();
    EXPECT_NEAR(m1, 0.0, 4e-3);
    EXPECT_NEAR(m2 - m1 * m1, 1.0, 0.02);
}

TEST(Noise, AtomIndex) {
    const NoiseSpec s = binary_noise(2.0);
    EXPECT_EQ(s.atom_index(-0.5), 0u);
    EXPECT_EQ(s.atom_index(2.0), 1u);
    EXPECT_THROW(s.atom_index(1.0), ValidationError);
}
