#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "starea/rng.hpp"
#include "starea/specfun.hpp"
#include "starea/stats.hpp"

using namespace starea;

TEST(EmpiricalCf, ZeroSamples) {
    SampleSet s{std::vector<double>(50, 0.0), "zeros"};
    auto c = empirical_cf(s, 3.0);
    EXPECT_DOUBLE_EQ(c.value.real(), 1.0);
    EXPECT_DOUBLE_EQ(c.value.imag(), 0.0);
    EXPECT_DOUBLE_EQ(c.std_error, 0.0);
    EXPECT_EQ(c.n_samples, 50u);
}

TEST(EmpiricalCf, SymmetricPair) {
    SampleSet s{{-1.3, 1.3}, ""};
    auto c = empirical_cf(s, 0.7);
    EXPECT_DOUBLE_EQ(c.value.real(), std::cos(0.7 * 1.3));
    EXPECT_EQ(c.value.imag(), 0.0);
}

TEST(EmpiricalCf, LambdaZeroIsExact) {
    SampleSet s{{0.1, 5.0, -2.0}, ""};
    auto c = empirical_cf(s, 0.0);
    EXPECT_EQ(c.value, std::complex<double>(1.0, 0.0));
    EXPECT_EQ(c.std_error, 0.0);
}

TEST(EmpiricalCf, CauchyScaleTwo) {
    NormalStream z(5, 0, 0);
    SampleSet s;
    for (int i = 0; i < 100000; ++i) s.values.push_back(2.0 * std::tan(std::numbers::pi * (z.uniform() - 0.5)));
    auto c = empirical_cf(s, 1.0);
    EXPECT_NEAR(c.value.real(), std::exp(-2.0), 3.0 * c.std_error);
    EXPECT_NEAR(c.value.imag(), 0.0, 3.0 * c.std_error);
}

TEST(EmpiricalCf, EmptyThrows) {
    EXPECT_THROW(empirical_cf(SampleSet{}, 1.0), EmptySample);
    EXPECT_THROW(ks_statistic(SampleSet{}, [](double) { return 0.5; }), EmptySample);
    EXPECT_THROW(histogram_density(SampleSet{}, 4, {0.0, 1.0}), EmptySample);
}

TEST(MeanSe, PairwiseSumIsAccurate) {
    std::vector<double> v(1 << 20, 0.1);
    EXPECT_NEAR(pairwise_sum(v), 0.1 * v.size(), 1e-9);
    auto m = mean_se({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Kolmogorov, KnownQuantiles) {
    EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-4);
    EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-4);
    EXPECT_NEAR(kolmogorov_survival(0.8276), 0.5, 1e-3);
    // both branches agree at the switch point
    EXPECT_NEAR(kolmogorov_survival(1.18 - 1e-12), kolmogorov_survival(1.18 + 1e-12), 1e-10);
}

TEST(KsStatistic, SingleSampleAtMedian) {
    auto r = ks_statistic(SampleSet{{0.0}, ""}, std_normal_cdf);
    EXPECT_DOUBLE_EQ(r.d, 0.5);
}

TEST(KsStatistic, ShiftedSample) {
    NormalStream z(1, 0, 0);
    SampleSet s;
    for (int i = 0; i < 1000; ++i) s.values.push_back(z() + 10.0);
    EXPECT_GT(ks_statistic(s, std_normal_cdf).d, 0.99);
}

TEST(KsStatistic, CalibratedUnderNull) {
    int pass = 0;
    const int reps = 100;
    for (int k = 0; k < reps; ++k) {
        NormalStream z(1000 + k, 0, 0);
        SampleSet s;
        for (int i = 0; i < 10000; ++i) s.values.push_back(z());
        pass += ks_statistic(s, std_normal_cdf).p_value > 0.01;
    }
    EXPECT_GE(pass, 99);
}

TEST(KsStatistic, InvariantUnderMonotoneMaps) {
    NormalStream z(9, 0, 0);
    SampleSet s, e;
    for (int i = 0; i < 2000; ++i) {
        double x = z();
        s.values.push_back(x);
        e.values.push_back(std::exp(x));
    }
    double a = ks_statistic(s, std_normal_cdf).d;
    double b = ks_statistic(e, [](double y) { return std_normal_cdf(std::log(y)); }).d;
    EXPECT_NEAR(a, b, 1e-12);
}

TEST(Histogram, UniformSamples) {
    NormalStream z(4, 0, 0);
    SampleSet s;
    for (int i = 0; i < 100000; ++i) s.values.push_back(z.uniform());
    auto h = histogram_density(s, 10, {0.0, 1.0});
    for (auto& b : h.bins) EXPECT_NEAR(b.density, 1.0, 3.0 * b.std_error);
}

TEST(Histogram, SingleBinAndMass) {
    auto h = histogram_density(SampleSet{{0.21, 0.22, 0.23, 5.0}, ""}, 5, {0.0, 1.0});
    EXPECT_DOUBLE_EQ(h.bins[1].density, 0.75 / 0.2);
    double mass = h.out_of_range;
    for (auto& b : h.bins) {
        EXPECT_GE(b.density, 0.0);
        mass += b.density * h.width;
    }
    EXPECT_NEAR(mass, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(h.out_of_range, 0.25);
}

TEST(Histogram, BadArguments) {
    SampleSet s{{0.5}, ""};
    EXPECT_THROW(histogram_density(s, 1, {0.0, 1.0}), DomainError);
    EXPECT_THROW(histogram_density(s, 4, {1.0, 1.0}), DomainError);
}
