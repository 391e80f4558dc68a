#include <gtest/gtest.h>

#include "swlab/sampling.hpp"

using namespace swlab;

TEST(Quaternion, MultiplicationTable) {
    const auto i = Quaternion::I(), j = Quaternion::J(), k = Quaternion::K();
    EXPECT_EQ(max_abs_diff(i * j, k), 0.0);
    EXPECT_EQ(max_abs_diff(j * k, i), 0.0);
    EXPECT_EQ(max_abs_diff(k * i, j), 0.0);
    EXPECT_EQ(max_abs_diff(j * i, -k), 0.0);
    for (const auto& e : {i, j, k}) EXPECT_EQ(max_abs_diff(e * e, Quaternion(-1)), 0.0);
    EXPECT_EQ(max_abs_diff(i * j * k, Quaternion(-1)), 0.0);
}

TEST(Quaternion, Products) {
    const Quaternion a{1, 1, 0, 0}, b{1, 0, 1, 0};
    EXPECT_EQ(max_abs_diff(a * b, Quaternion(1, 1, 1, 1)), 0.0);
    const Quaternion q{0.3, -1.2, 2.5, 0.7};
    EXPECT_EQ(max_abs_diff(q * Quaternion::one(), q), 0.0);
}

TEST(Quaternion, AssociativeAndMultiplicativeNorm) {
    Rng r(7);
    for (int t = 0; t < 1000; ++t) {
        const auto a = r.quat(), b = r.quat(), c = r.quat();
        EXPECT_LT(max_abs_diff((a * b) * c, a * (b * c)), 1e-12 * (1 + a.abs() * b.abs() * c.abs()));
        EXPECT_NEAR((a * b).abs(), a.abs() * b.abs(), 1e-12 * a.abs() * b.abs());
        EXPECT_LT(max_abs_diff((a * b).conj(), b.conj() * a.conj()), 1e-12 * (1 + a.abs() * b.abs()));
    }
}

TEST(Quaternion, PhaseHelpers) {
    const Quaternion q{0.2, -0.4, 1.1, 0.9};
    const double t = 0.37;
    const Quaternion e{std::cos(t), std::sin(t), 0, 0};
    EXPECT_LT(max_abs_diff(phase_left(t, q), e * q), 1e-15);
    EXPECT_LT(max_abs_diff(phase_left_minus_one(t, q), e * q - q), 1e-15);
    // small-angle accuracy: (e^{it}-1)/t -> i
    const double tiny = 1e-12;
    EXPECT_LT(max_abs_diff(phase_left_minus_one(tiny, Quaternion::one()) / tiny, Quaternion::I()), 1e-12);
}
