#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "starea/rng.hpp"

using starea::NormalStream;
using starea::Philox4x32;

TEST(Philox, KnownAnswerVectors) {
    auto a = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(a, (Philox4x32::ctr_type{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    auto b = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(b, (Philox4x32::ctr_type{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    auto c = Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(c, (Philox4x32::ctr_type{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(NormalStream, Reproducible) {
    NormalStream a(7, 123, 0), b(7, 123, 0);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(NormalStream, StreamsAndPathsDiffer) {
    NormalStream a(7, 1, 0), b(7, 2, 0), c(7, 1, 1), d(8, 1, 0);
    double x = a();
    EXPECT_NE(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(NormalStream, HighPathBitsMatter) {
    NormalStream a(1, 5, 0), b(1, 5 + (std::uint64_t(1) << 32), 0);
    EXPECT_NE(a(), b());
}

TEST(NormalStream, Moments) {
    NormalStream z(42, 0, 0);
    const int n = 400000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        double x = z();
        m1 += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(NormalStream, UniformRange) {
    NormalStream z(3, 9, 2);
    std::set<double> seen;
    for (int i = 0; i < 10000; ++i) {
        double u = z.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        seen.insert(u);
    }
    EXPECT_EQ(seen.size(), 10000u);
}
