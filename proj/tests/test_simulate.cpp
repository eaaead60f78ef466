#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "starea/analytics.hpp"
#include "starea/densities.hpp"
#include "starea/simulate.hpp"

using namespace starea;

namespace {
const double half_pi = 0.5 * std::numbers::pi;

SimConfig config(double horizon, double dt, std::uint64_t paths, std::uint64_t seed) {
    SimConfig c;
    c.horizon = horizon;
    c.dt = dt;
    c.paths = paths;
    c.master_seed = seed;
    return c;
}

SampleSet r_ends(const Stream<RadialSample>& s) {
    SampleSet out;
    for (auto& x : s.samples) out.values.push_back(x.r_end);
    return out;
}
}  // namespace

TEST(SimConfig, Validation) {
    SimConfig c;
    c.dt = 2.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SimConfig{};
    c.paths = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SimConfig{};
    c.horizon = -1;
    EXPECT_THROW(sample_area(Geometry::cp(1), c), ConfigError);
    EXPECT_THROW(Geometry::ch(0), DomainError);
}

class SphericalStationary : public ::testing::TestWithParam<Scheme> {};

TEST_P(SphericalStationary, KsAgainstSin2) {
    auto cfg = config(3.0, GetParam() == Scheme::euler_rho ? 1e-3 : 4e-3, 10000, 31);
    cfg.scheme = GetParam();
    auto s = sample_radial_spherical(JacobiParams(0, 0), 0.0, cfg);
    auto ks = ks_statistic(r_ends(s), [](double r) { double v = std::sin(r); return v * v; });
    EXPECT_LT(ks.d, oracle::ks_critical_1pct(10000));
}

INSTANTIATE_TEST_SUITE_P(Schemes, SphericalStationary,
                         ::testing::Values(Scheme::log_clock, Scheme::euler_rho, Scheme::semi_implicit_r));

TEST(SphericalSampler, HistogramMatchesSeries) {
    auto cfg = config(0.5, 4e-3, 100000, 5);
    JacobiParams p(1.0, 0.0);
    auto s = sample_radial_spherical(p, 0.0, cfg);
    auto h = histogram_density(r_ends(s), 20, {0.0, half_pi});
    for (auto& b : h.bins) {
        double lo = b.center - 0.5 * h.width;
        double expect =
            oracle::simpson([&](double r) { return spherical_density(p, 0.5, 0.0, r).value; }, lo, lo + h.width, 8) / h.width;
        EXPECT_NEAR(b.density, expect, 3.0 * b.std_error) << b.center;
    }
}

TEST(SphericalSampler, SingleStep) {
    for (Scheme sc : {Scheme::euler_rho, Scheme::semi_implicit_r, Scheme::log_clock})
        for (double r0 : {0.0, 0.3, 1.2}) {
            auto cfg = config(0.5, 0.5, 200, 1);
            cfg.scheme = sc;
            auto s = sample_radial_spherical(JacobiParams(1, 0), r0, cfg, SphericalClock::tan2);
            for (auto& x : s.samples) {
                ASSERT_TRUE(std::isfinite(x.r_end));
                ASSERT_GE(x.r_end, 0.0);
                ASSERT_LE(x.r_end, half_pi);
                ASSERT_TRUE(std::isfinite(x.clock));
                ASSERT_GE(x.clock, 0.0);
            }
        }
}

TEST(SphericalSampler, Tan2ClockFinite) {
    auto cfg = config(2.0, 1e-3, 2000, 8);
    for (Scheme sc : {Scheme::euler_rho, Scheme::log_clock}) {
        cfg.scheme = sc;
        auto s = sample_radial_spherical(JacobiParams(0, 0), 0.0, cfg, SphericalClock::tan2);
        for (auto& x : s.samples) ASSERT_TRUE(std::isfinite(x.clock) && x.clock >= 0.0);
    }
}

TEST(SphericalSampler, RejectsBadArguments) {
    SimConfig cfg;
    EXPECT_THROW(sample_radial_spherical(JacobiParams(0, 0), half_pi, cfg), DomainError);
    EXPECT_THROW(sample_radial_spherical(JacobiParams(-0.5, 0), 0.1, cfg), DomainError);
}

TEST(HyperbolicSampler, TransienceBound) {
    for (int n : {1, 2, 3}) {
        auto cfg = config(5.0, 1e-3, 200, 17 + n);
        std::vector<std::uint64_t> violations(cfg.paths, 0);
        const double a = n - 0.5;
        auto obs = [&](std::uint64_t path, double t, double r, double gamma) {
            if (r < a * t + gamma - cfg.dt) ++violations[path];
        };
        sample_radial_hyperbolic(n, 0.0, 0.0, cfg, HyperbolicClock::none, obs);
        std::uint64_t total = 0;
        for (auto v : violations) total += v;
        EXPECT_EQ(total, 0u) << n;
    }
}

TEST(HyperbolicSampler, Tanh2ClockGrowsLinearly) {
    auto cfg = config(50.0, 5e-3, 1000, 4);
    auto s = sample_radial_hyperbolic(1, 0.0, 0.0, cfg, HyperbolicClock::tanh2);
    double m = 0.0;
    for (auto& x : s.samples) {
        ASSERT_LE(x.clock, cfg.horizon);
        m += x.clock / cfg.horizon;
    }
    EXPECT_NEAR(m / cfg.paths, 1.0, 0.02);
}

TEST(HyperbolicSampler, DriftDominance) {
    auto cfg = config(2.0, 1e-3, 500, 77);
    auto s0 = sample_radial_hyperbolic(2, 0.0, 0.3, cfg);
    auto s1 = sample_radial_hyperbolic(2, 1.0, 0.3, cfg);
    for (std::size_t i = 0; i < s0.samples.size(); ++i) ASSERT_GE(s1.samples[i].r_end, s0.samples[i].r_end);
}

TEST(HyperbolicSampler, StepSizeWarning) {
    auto cfg = config(0.1, 1e-2, 10, 1);
    EXPECT_EQ(sample_radial_hyperbolic(1, 0.0, 0.1, cfg).stats.warnings, 10u);
    EXPECT_EQ(sample_radial_hyperbolic(1, 0.0, 1.0, cfg).stats.warnings, 0u);
}

TEST(HyperbolicSampler, LogCoshClock) {
    auto cfg = config(1.0, 1e-2, 50, 3);
    auto s = sample_radial_hyperbolic(1, 0.0, 0.0, cfg, HyperbolicClock::log_cosh);
    for (auto& x : s.samples) EXPECT_NEAR(x.clock, std::log(std::cosh(x.r_end)), 1e-12);
}

TEST(AreaSampler, CentredAndBounded) {
    for (auto g : {Geometry::cp(1), Geometry::ch(2)}) {
        auto cfg = config(1.0, 4e-3, 5000, 12);
        auto s = sample_area(g, cfg);
        std::vector<double> th;
        for (auto& x : s.samples) {
            th.push_back(x.theta_end);
            ASSERT_GE(x.time_change, 0.0);
            if (g.kind == Geometry::Kind::ch) ASSERT_LE(x.time_change, cfg.horizon);
        }
        auto ms = mean_se(th);
        EXPECT_NEAR(ms.mean, 0.0, 3.0 * ms.se);
    }
}

TEST(AreaSampler, HyperbolicVarianceNearOne) {
    auto cfg = config(50.0, 1e-2, 10000, 99);
    auto s = sample_area(Geometry::ch(1), cfg);
    std::vector<double> v;
    for (auto& x : s.samples) v.push_back(x.theta_end * x.theta_end / cfg.horizon);
    EXPECT_NEAR(mean_se(v).mean, 1.0, 0.05);
}

// theta from dtheta = tan r dB along an Euler path of rho = cos 2r
TEST(AreaSampler, SkewProductMatchesDirectCoupling) {
    auto cfg = config(1.0, 4e-3, 10000, 404);
    auto s = sample_area(Geometry::cp(1), cfg);
    std::vector<double> a, b;
    for (auto& x : s.samples) a.push_back(x.theta_end);
    const double h = 2e-4;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        NormalStream z(91, i, 0);
        double rho = std::cos(2e-6), th = 0.0;
        for (int k = 0; k < 5000; ++k) {
            double tan2 = std::min((1 - rho) / (1 + rho), 1e12);
            th += std::sqrt(tan2 * h) * z();
            rho += -4.0 * rho * h + 2.0 * std::sqrt(std::max(0.0, 1 - rho * rho)) * std::sqrt(h) * z();
            if (rho > 1) rho = 2 - rho;
            if (rho < -1) rho = -2 - rho;
        }
        b.push_back(th);
    }
    EXPECT_LT(oracle::two_sample_ks(a, b), oracle::ks2_critical_1pct(10000, 10000));
}

TEST(AreaSampler, EntranceEpsilonInsensitive) {
    for (auto g : {Geometry::cp(1), Geometry::ch(1)}) {
        auto cfg = config(1.0, 4e-3, 4000, 6);
        auto a = sample_area(g, cfg);
        cfg.entrance_eps *= 0.5;
        auto b = sample_area(g, cfg);
        std::vector<double> ta, tb;
        for (auto& x : a.samples) ta.push_back(x.time_change);
        for (auto& x : b.samples) tb.push_back(x.time_change);
        auto ma = mean_se(ta), mb = mean_se(tb);
        EXPECT_LT(std::abs(ma.mean - mb.mean), ma.se);
    }
}

TEST(AreaSampler, DeterministicAcrossWorkers) {
    for (auto g : {Geometry::cp(2), Geometry::ch(1)}) {
        auto cfg = config(0.5, 4e-3, 3001, 2718);
        cfg.threads = 1;
        auto a = sample_area(g, cfg);
        cfg.threads = 4;
        auto b = sample_area(g, cfg);
        ASSERT_EQ(a.samples.size(), b.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            ASSERT_EQ(a.samples[i].theta_end, b.samples[i].theta_end);
            ASSERT_EQ(a.samples[i].r_end, b.samples[i].r_end);
        }
        EXPECT_EQ(a.stats.steps, b.stats.steps);
    }
}

TEST(Girsanov, LambdaZero) {
    auto cfg = config(1.0, 1e-2, 100, 1);
    for (auto g : {Geometry::cp(1), Geometry::ch(1)}) {
        auto e = girsanov_cf_estimator(g, 0.0, cfg);
        EXPECT_DOUBLE_EQ(e.value.real(), 1.0);
        EXPECT_EQ(e.std_error, 0.0);
    }
}

TEST(Girsanov, SphericalMatchesAnalytic) {
    auto cfg = config(1.0, 4e-3, 20000, 55);
    auto e = girsanov_cf_estimator(Geometry::cp(1), 1.0, cfg);
    EXPECT_NEAR(e.value.real(), cf_marginal_cp(1, 1.0, 1.0), 3.0 * e.std_error);
}

TEST(Girsanov, HyperbolicMatchesDirect) {
    auto cfg = config(1.0, 1e-3, 20000, 56);
    auto e = girsanov_cf_estimator(Geometry::ch(1), 1.0, cfg);
    cfg.master_seed = 57;
    auto s = sample_area(Geometry::ch(1), cfg);
    SampleSet th;
    for (auto& x : s.samples) th.values.push_back(x.theta_end);
    auto d = empirical_cf(th, 1.0);
    EXPECT_NEAR(e.value.real(), d.value.real(), 3.0 * std::hypot(e.std_error, d.std_error));
}

TEST(WindingSampler, CentredWithPositiveClock) {
    for (auto g : {WindingGeometry::cp1, WindingGeometry::ch1}) {
        auto cfg = config(1.0, 1e-3, 4000, 21);
        auto s = sample_winding(g, 0.7, cfg);
        std::vector<double> phi;
        for (auto& x : s.samples) {
            ASSERT_GE(x.clock, 0.0);
            phi.push_back(x.phi_end);
        }
        auto ms = mean_se(phi);
        EXPECT_NEAR(ms.mean, 0.0, 3.0 * ms.se);
    }
    EXPECT_THROW(sample_winding(WindingGeometry::cp1, 0.0, SimConfig{}), DomainError);
    EXPECT_THROW(sample_winding(WindingGeometry::ch1, -1.0, SimConfig{}), DomainError);
}

TEST(WindingSampler, Ch1SchemesAgree) {
    auto cfg = config(2.0, 1e-3, 4000, 8);
    auto a = sample_winding(WindingGeometry::ch1, 0.5, cfg);
    cfg.scheme = Scheme::semi_implicit_r;
    cfg.master_seed = 9;
    auto b = sample_winding(WindingGeometry::ch1, 0.5, cfg);
    SampleSet pa, pb;
    for (auto& x : a.samples) pa.values.push_back(x.phi_end);
    for (auto& x : b.samples) pb.values.push_back(x.phi_end);
    auto ca = empirical_cf(pa, 1.0), cb = empirical_cf(pb, 1.0);
    EXPECT_NEAR(ca.value.real(), cb.value.real(), 3.0 * std::hypot(ca.std_error, cb.std_error));
}

// E exp(i lam phi_t / t) on CP^1 at finite t. With nu = lam/t and f = (sin 2r)^nu,
// f(r_t) exp(-int Lf/f) is the Doob transform onto the (nu, nu) Jacobi diffusion.
double cp1_winding_cf_exact(double t, double lam, double r0) {
    const double nu = lam / t;
    JacobiParams p(nu, nu);
    double I = integrate_or_throw([&](double r) { return spherical_density(p, t, r0, r).value * std::pow(std::sin(2 * r), -nu); },
                                  0.0, half_pi, 1e-13, 1e-12).value;
    return std::exp(-2 * lam - 2 * lam * lam / t) * std::pow(std::sin(2 * r0), nu) * I;
}

TEST(WindingSampler, Cp1FiniteTimeCf) {
    const double t = 1.0, r0 = 0.6;
    {
        auto cfg = config(t, 4e-3, 20000, 12);
        auto s = sample_winding(WindingGeometry::cp1, r0, cfg);
        SampleSet v;
        for (auto& x : s.samples) v.values.push_back(x.phi_end / t);
        for (double lam : {0.25, 0.5}) {
            auto e = empirical_cf(v, lam);
            EXPECT_NEAR(e.value.real(), cp1_winding_cf_exact(t, lam, r0), 3.0 * e.std_error) << lam;
        }
    }
}

TEST(PlanarSampler, CentredArea) {
    auto s = sample_planar_area(1.0, config(1.0, 1e-2, 20000, 3));
    std::vector<double> v;
    for (auto& x : s.samples) v.push_back(x.s_end);
    auto ms = mean_se(v);
    EXPECT_NEAR(ms.mean, 0.0, 3.0 * ms.se);
}

TEST(PlanarSampler, UnconditionalCf) {
    auto s = sample_planar_area(1.0, config(1.0, 1e-2, 100000, 4));
    SampleSet v;
    for (auto& x : s.samples) v.values.push_back(x.s_end);
    auto c = empirical_cf(v, 1.0);
    EXPECT_NEAR(c.value.real(), levy_unconditional_cf(1.0, 1.0), 3.0 * c.std_error);
}

TEST(PlanarSampler, ConditionedAtOrigin) {
    auto s = sample_planar_area(1.0, config(1.0, 1e-2, 200000, 5));
    SampleSet v;
    for (auto& x : s.samples)
        if (std::abs(x.z_end) < 0.1) v.values.push_back(x.s_end);
    ASSERT_GT(v.values.size(), 500u);
    auto c = empirical_cf(v, 1.0);
    EXPECT_NEAR(c.value.real(), 1.0 / std::sinh(1.0), 5.0 * c.std_error);
}
