#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "specfun.hpp"
#include "stats.hpp"

namespace starea {

// log_clock: spherical and winding paths run in s = ln tan r (ln tanh r for
// CH^1 windings) on their intrinsic clock, where the noise is additive.
enum class Scheme { euler_rho, semi_implicit_r, log_clock };

struct SimConfig {
    double horizon = 1.0;
    double dt = 1e-3;
    std::uint64_t paths = 1000;
    std::uint64_t master_seed = 0;
    Scheme scheme = Scheme::log_clock;
    unsigned threads = 1;  // does not affect results
    double entrance_eps = 1e-6;

    void validate() const {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
        if (!(dt > 0.0)) throw ConfigError("dt must be positive");
        if (dt > horizon) throw ConfigError("dt must not exceed the horizon");
        if (paths < 1) throw ConfigError("paths must be >= 1");
        if (!(entrance_eps > 0.0 && entrance_eps < 0.1)) throw ConfigError("entrance_eps must lie in (0, 0.1)");
    }
};

struct Geometry {
    enum class Kind { cp, ch };
    Kind kind = Kind::cp;
    int n = 1;
    static Geometry cp(int n) { return make(Kind::cp, n); }
    static Geometry ch(int n) { return make(Kind::ch, n); }

  private:
    static Geometry make(Kind k, int n) {
        if (n < 1) throw DomainError("complex dimension must be >= 1");
        Geometry g;
        g.kind = k;
        g.n = n;
        return g;
    }
};

enum class WindingGeometry { cp1, ch1 };
enum class SphericalClock { none, tan2, inv_sin2_2r };
enum class HyperbolicClock { none, tanh2, inv_sinh2_2r, log_cosh };

struct SamplerStats {
    std::uint64_t steps = 0;
    std::uint64_t clamps = 0;    // boundary clamps / reflections
    std::uint64_t caps = 0;      // clock integrand caps or step-budget hits
    std::uint64_t warnings = 0;  // e.g. dt > r0^2/10 at start

    SamplerStats& operator+=(const SamplerStats& o) {
        steps += o.steps;
        clamps += o.clamps;
        caps += o.caps;
        warnings += o.warnings;
        return *this;
    }
};

struct RadialSample {
    double r_end = 0.0;
    double clock = 0.0;
    double log_trig_end = 0.0;  // ln cos r_end (spherical) or ln cosh r_end (hyperbolic)
};

struct AreaSample {
    double r_end = 0.0;
    double theta_end = 0.0;
    double time_change = 0.0;
};

struct WindingSample {
    double phi_end = 0.0;
    double clock = 0.0;
};

struct PlanarSample {
    std::complex<double> z_end;
    double s_end = 0.0;
};

template <class T>
struct Stream {
    std::vector<T> samples;
    SamplerStats stats;
};

inline constexpr double clock_cap = 1e12;

namespace detail {

inline constexpr std::uint32_t radial_stream = 0;
inline constexpr std::uint32_t fibre_stream = 1;

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline std::uint64_t step_budget(const SimConfig& cfg) {
    return std::uint64_t(200.0 * cfg.horizon / cfg.dt) + 2000000;
}

inline double refined_dt(const SimConfig& cfg, bool refine, double t) {
    return (refine && t < 0.01 * cfg.horizon) ? std::min(cfg.dt, 1e-4) : cfg.dt;
}

// Step on the intrinsic clock. Real-time steps of dte near the middle,
// at most 20 dt while |s| <= S2 (real time still accrues there and the
// trapezoid rule for e^{-2|s|} needs small h); beyond S2 the step grows with
// depth, limited so the drift cannot carry the path back across S2.
inline double log_clock_step(double dte, double dt, double g, double abs_s, double abs_mu) {
    constexpr double S2 = 6.0, kappa = 0.04;
    const double h_real = (g > 0.0) ? dte / g : std::numeric_limits<double>::infinity();
    const double h_mid = 20.0 * dt;
    if (abs_s <= S2) return std::min(h_real, h_mid);
    double depth = abs_s - S2;
    double deep = kappa * depth * depth;
    if (abs_mu > 0.0) deep = std::min(deep, 0.25 * depth / abs_mu);
    return std::min(h_real, std::max(h_mid, deep));
}

// sin^2 r, cos^2 r and sin^2 r cos^2 r from s = ln tan r, overflow-safe
struct TanState {
    double s, sin2, cos2, g;
    explicit TanState(double s_) : s(s_) {
        double e = std::exp(-2.0 * std::abs(s));
        double inv = 1.0 / (1.0 + e);
        double big = inv, small = e * inv;
        sin2 = s >= 0.0 ? big : small;
        cos2 = s >= 0.0 ? small : big;
        g = big * small;
    }
};

// Jacobi(a,b) on [0, pi/2] in s = ln tan r, time tau with d tau = 4 dt / sin^2 2r:
//   ds = (a cos^2 r - b sin^2 r) d tau + dW_tau,  dt = sin^2 r cos^2 r d tau,
//   tan^2 r dt = sin^4 r d tau.
inline RadialSample spherical_log_clock(double a, double b, double r0, const SimConfig& cfg, SphericalClock clock,
                                        NormalStream& z, SamplerStats& st) {
    const double H = cfg.horizon;
    const bool refine = (r0 == 0.0);
    TanState x(std::log(std::tan(refine ? cfg.entrance_eps : r0)));
    auto mu = [&](const TanState& q) { return a * q.cos2 - b * q.sin2; };
    auto rate = [&](const TanState& q) {
        switch (clock) {
            case SphericalClock::tan2: return q.sin2 * q.sin2;
            case SphericalClock::inv_sin2_2r: return 1.0;
            default: return 0.0;
        }
    };
    double t = 0.0, clk = 0.0;
    const std::uint64_t budget = step_budget(cfg);
    std::uint64_t steps = 0;
    while (t < H) {
        double dte = refined_dt(cfg, refine, t);
        double m0 = mu(x);
        double h = log_clock_step(dte, cfg.dt, x.g, std::abs(x.s), std::abs(m0));
        bool last = false;
        if (t + x.g * h >= H) {
            h = (H - t) / x.g;
            last = true;
        }
        double dw = std::sqrt(h) * z();
        TanState xp(x.s + m0 * h + dw);
        TanState x1(x.s + 0.5 * (m0 + mu(xp)) * h + dw);
        t = last ? H : std::min(H, t + 0.5 * (x.g + x1.g) * h);
        clk += 0.5 * (rate(x) + rate(x1)) * h;
        x = x1;
        if (++steps > budget) {
            ++st.caps;
            break;
        }
    }
    st.steps += steps;
    return {std::atan(std::exp(x.s)), clk, -0.5 * softplus(2.0 * x.s)};
}

inline double spherical_clock_integrand(SphericalClock clock, double one_minus_rho, double one_plus_rho) {
    switch (clock) {
        case SphericalClock::tan2: return one_minus_rho / one_plus_rho;
        case SphericalClock::inv_sin2_2r: return 4.0 / (one_minus_rho * one_plus_rho);
        default: return 0.0;
    }
}

inline double capped(double v, SamplerStats& st) {
    if (!(v <= clock_cap)) {
        ++st.caps;
        return clock_cap;
    }
    return v;
}

inline RadialSample spherical_euler_rho(double a, double b, double r0, const SimConfig& cfg, SphericalClock clock,
                                        NormalStream& z, SamplerStats& st) {
    const double H = cfg.horizon;
    const bool refine = (r0 == 0.0);
    double r = refine ? cfg.entrance_eps : r0;
    double rho = std::cos(2.0 * r);
    // 1 - rho and 1 + rho carried from r at the start to keep the epsilon
    double om = 2.0 * std::sin(r) * std::sin(r), op = 2.0 * std::cos(r) * std::cos(r);
    double f0 = capped(spherical_clock_integrand(clock, om, op), st);
    double t = 0.0, clk = 0.0;
    while (t < H) {
        double h = std::min(refined_dt(cfg, refine, t), H - t);
        double drift = -2.0 * ((a + b + 2.0) * rho + a - b);
        double diff = 2.0 * std::sqrt(std::max(0.0, om * op));
        double rho1 = rho + drift * h + diff * std::sqrt(h) * z();
        if (rho1 > 1.0 || rho1 < -1.0) {
            ++st.clamps;
            rho1 = std::clamp(rho1, -1.0, 1.0);
        }
        rho = rho1;
        om = 1.0 - rho;
        op = 1.0 + rho;
        double f1 = capped(spherical_clock_integrand(clock, om, op), st);
        clk += 0.5 * (f0 + f1) * h;
        f0 = f1;
        t = (H - t <= h) ? H : t + h;
        ++st.steps;
    }
    return {0.5 * std::acos(rho), clk, 0.5 * std::log(0.5 * op)};
}

// x - h/2 ((2a+1) cot x - (2b+1) tan x) = c on (0, pi/2); F is increasing.
inline double solve_spherical_implicit(double a, double b, double h, double c, double guess) {
    const double lo0 = 0.0, hi0 = 0.5 * std::numbers::pi;
    auto F = [&](double x) { return x - 0.5 * h * ((2 * a + 1) / std::tan(x) - (2 * b + 1) * std::tan(x)) - c; };
    double lo = lo0, hi = hi0;
    double x = std::clamp(guess, 1e-300, hi0 - 1e-16);
    for (int it = 0; it < 200; ++it) {
        double fx = F(x);
        if (fx > 0.0) hi = x; else lo = x;
        double sx = std::sin(x), cx = std::cos(x);
        double dF = 1.0 + 0.5 * h * ((2 * a + 1) / (sx * sx) + (2 * b + 1) / (cx * cx));
        double nx = x - fx / dF;
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::abs(nx - x) <= 1e-15 * std::max(x, 1e-300) || hi - lo <= 1e-300) return nx;
        x = nx;
    }
    return x;
}

inline RadialSample spherical_semi_implicit(double a, double b, double r0, const SimConfig& cfg, SphericalClock clock,
                                            NormalStream& z, SamplerStats& st) {
    const double H = cfg.horizon;
    const bool refine = (r0 == 0.0);
    double r = refine ? cfg.entrance_eps : r0;
    auto f = [&](double r) {
        return capped(spherical_clock_integrand(clock, 2.0 * std::sin(r) * std::sin(r), 2.0 * std::cos(r) * std::cos(r)), st);
    };
    double f0 = f(r), t = 0.0, clk = 0.0;
    while (t < H) {
        double h = std::min(refined_dt(cfg, refine, t), H - t);
        double c = r + std::sqrt(h) * z();
        double r1 = solve_spherical_implicit(a, b, h, c, r);
        double f1 = f(r1);
        clk += 0.5 * (f0 + f1) * h;
        f0 = f1;
        r = r1;
        t = (H - t <= h) ? H : t + h;
        ++st.steps;
    }
    return {r, clk, std::log(std::cos(r))};
}

inline RadialSample spherical_path(double a, double b, double r0, const SimConfig& cfg, SphericalClock clock,
                                   NormalStream& z, SamplerStats& st) {
    switch (cfg.scheme) {
        case Scheme::euler_rho: return spherical_euler_rho(a, b, r0, cfg, clock, z, st);
        case Scheme::semi_implicit_r: return spherical_semi_implicit(a, b, r0, cfg, clock, z, st);
        default: return spherical_log_clock(a, b, r0, cfg, clock, z, st);
    }
}

inline double log_cosh(double r) { return std::abs(r) + std::log1p(std::exp(-2.0 * std::abs(r))) - std::numbers::ln2; }

// x - ah coth x = c, x > 0. Both starting points are below the root (coth x
// exceeds 1/x and 1), and Newton stays below it because the map is concave
// and increasing.
inline double solve_coth_implicit(double ah, double c) {
    double q = std::sqrt(c * c + 4.0 * ah);
    double x = (c >= 0.0) ? 0.5 * (c + q) : 2.0 * ah / (q - c);
    x = std::max(x, c + ah);
    for (int it = 0; it < 100; ++it) {
        double e = std::exp(-2.0 * x);
        double coth = (1.0 + e) / (1.0 - e);
        double G = x - ah * coth - c;
        double dG = 1.0 + ah * 4.0 * e / ((1.0 - e) * (1.0 - e));
        double nx = x - G / dG;
        if (!(nx > 0.0)) nx = 0.5 * x;
        if (std::abs(nx - x) <= 4e-16 * nx) return nx;
        x = nx;
    }
    return x;
}

inline double hyperbolic_clock_integrand(HyperbolicClock clock, double r, SamplerStats& st) {
    switch (clock) {
        case HyperbolicClock::tanh2: { double th = std::tanh(r); return th * th; }
        case HyperbolicClock::inv_sinh2_2r: { double sh = std::sinh(2.0 * r); return capped(4.0 / (sh * sh), st); }
        default: return 0.0;
    }
}

struct NoObserver {
    void operator()(std::uint64_t, double, double, double) const {}
};

// dr = 1/2((2n-1) coth r + (2 lam + 1) tanh r) dt + dW, coth part implicit.
template <class Obs>
RadialSample hyperbolic_path(int n, double lam, double r0, const SimConfig& cfg, HyperbolicClock clock,
                             NormalStream& z, SamplerStats& st, std::uint64_t path, Obs& obs) {
    const double H = cfg.horizon;
    const bool refine = (r0 == 0.0);
    double r = refine ? cfg.entrance_eps : r0;
    if (!refine && cfg.dt > r0 * r0 / 10.0) ++st.warnings;
    const double a = n - 0.5, b = lam + 0.5;
    double f0 = hyperbolic_clock_integrand(clock, r, st);
    double t = 0.0, clk = 0.0, gamma = 0.0;
    while (t < H) {
        double h = std::min(refined_dt(cfg, refine, t), H - t);
        double dw = std::sqrt(h) * z();
        double c = r + b * h * std::tanh(r) + dw;
        double r1 = solve_coth_implicit(a * h, c);
        double f1 = hyperbolic_clock_integrand(clock, r1, st);
        clk += 0.5 * (f0 + f1) * h;
        f0 = f1;
        r = r1;
        gamma += dw;
        t = (H - t <= h) ? H : t + h;
        ++st.steps;
        obs(path, t, r, gamma);
    }
    double lc = log_cosh(r);
    if (clock == HyperbolicClock::log_cosh) clk = lc;
    return {r, clk, lc};
}

// CH^1 winding radial part: s = ln tanh r is a driftless Brownian motion in
// tau = int 4/sinh^2 2r dt, and dt = d tau / (4 sinh^2 s).
inline double ch1_winding_clock(double r0, const SimConfig& cfg, NormalStream& z, SamplerStats& st) {
    const double H = cfg.horizon;
    double s = std::log(std::tanh(r0));
    auto g = [](double s) {
        double as = std::abs(s);
        if (as > 1.0) {
            double e = std::exp(-2.0 * as);
            return e / ((1.0 - e) * (1.0 - e));
        }
        double sh = std::sinh(s);
        return 1.0 / (4.0 * sh * sh);
    };
    double t = 0.0, tau = 0.0;
    const std::uint64_t budget = step_budget(cfg);
    std::uint64_t steps = 0;
    while (t < H) {
        if (std::abs(s) < 1e-280) break;  // r beyond ~320: the clock no longer moves
        double gs = g(s);
        double h = log_clock_step(cfg.dt, cfg.dt, gs, std::abs(s), 0.0);
        bool last = false;
        if (t + gs * h >= H) {
            h = (H - t) / gs;
            last = true;
        }
        double s1 = s + std::sqrt(h) * z();
        if (s1 >= 0.0) {
            ++st.clamps;
            s1 = 0.5 * s;
        }
        t = last ? H : std::min(H, t + 0.5 * (gs + g(s1)) * h);
        tau += h;
        s = s1;
        if (++steps > budget) {
            ++st.caps;
            break;
        }
    }
    st.steps += steps;
    return tau;
}

// CH^1 winding radial part on r: dr = coth 2r dt + dW, implicit.
inline double ch1_winding_clock_r(double r0, const SimConfig& cfg, NormalStream& z, SamplerStats& st) {
    const double H = cfg.horizon;
    double r = r0, t = 0.0, clk = 0.0;
    auto f = [&](double r) { double sh = std::sinh(2.0 * r); return capped(4.0 / (sh * sh), st); };
    double f0 = f(r);
    while (t < H) {
        double h = std::min(cfg.dt, H - t);
        // x - h coth 2x = c  <=>  2x - 2h coth 2x = 2c
        double r1 = 0.5 * solve_coth_implicit(2.0 * h, 2.0 * (r + std::sqrt(h) * z()));
        double f1 = f(r1);
        clk += 0.5 * (f0 + f1) * h;
        f0 = f1;
        r = r1;
        t = (H - t <= h) ? H : t + h;
        ++st.steps;
    }
    return clk;
}

template <class T, class PathFn>
Stream<T> run_paths(const SimConfig& cfg, PathFn&& fn) {
    cfg.validate();
    Stream<T> out;
    out.samples.resize(cfg.paths);
    unsigned workers = std::max(1u, cfg.threads);
    std::vector<SamplerStats> per(workers);
    parallel_for(cfg.paths, workers, [&](std::uint64_t i, unsigned w) { out.samples[i] = fn(i, per[w]); });
    for (auto& s : per) out.stats += s;
    return out;
}

}  // namespace detail

inline Stream<RadialSample> sample_radial_spherical(const JacobiParams& p, double r0, const SimConfig& cfg,
                                                    SphericalClock clock = SphericalClock::none) {
    if (p.alpha < 0.0 || p.beta < 0.0) throw DomainError("spherical sampler needs alpha, beta >= 0");
    if (!(r0 >= 0.0 && r0 < 0.5 * std::numbers::pi)) throw DomainError("r0 must lie in [0, pi/2)");
    return detail::run_paths<RadialSample>(cfg, [&](std::uint64_t i, SamplerStats& st) {
        NormalStream z(cfg.master_seed, i, detail::radial_stream);
        return detail::spherical_path(p.alpha, p.beta, r0, cfg, clock, z, st);
    });
}

// obs(path, t, r, gamma) is called after every step; it runs on worker threads.
template <class Obs = detail::NoObserver>
Stream<RadialSample> sample_radial_hyperbolic(int n, double girsanov_lambda, double r0, const SimConfig& cfg,
                                              HyperbolicClock clock = HyperbolicClock::none, Obs&& obs = Obs{}) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (!(girsanov_lambda >= 0.0)) throw DomainError("girsanov_lambda must be >= 0");
    if (!(r0 >= 0.0)) throw DomainError("r0 must be >= 0");
    return detail::run_paths<RadialSample>(cfg, [&](std::uint64_t i, SamplerStats& st) {
        NormalStream z(cfg.master_seed, i, detail::radial_stream);
        return detail::hyperbolic_path(n, girsanov_lambda, r0, cfg, clock, z, st, i, obs);
    });
}

inline Stream<AreaSample> sample_area(Geometry g, const SimConfig& cfg) {
    return detail::run_paths<AreaSample>(cfg, [&](std::uint64_t i, SamplerStats& st) {
        NormalStream z(cfg.master_seed, i, detail::radial_stream);
        RadialSample rs;
        if (g.kind == Geometry::Kind::cp) {
            rs = detail::spherical_path(g.n - 1.0, 0.0, 0.0, cfg, SphericalClock::tan2, z, st);
        } else {
            detail::NoObserver none;
            rs = detail::hyperbolic_path(g.n, 0.0, 0.0, cfg, HyperbolicClock::tanh2, z, st, i, none);
        }
        NormalStream zf(cfg.master_seed, i, detail::fibre_stream);
        return AreaSample{rs.r_end, std::sqrt(rs.clock) * zf(), rs.clock};
    });
}

inline CfEstimate girsanov_cf_estimator(Geometry g, double lam, const SimConfig& cfg) {
    if (!(lam >= 0.0)) throw DomainError("girsanov_cf_estimator needs lam >= 0");
    const double n = g.n, t = cfg.horizon;
    std::vector<double> w;
    if (g.kind == Geometry::Kind::cp) {
        auto s = sample_radial_spherical(JacobiParams(n - 1.0, lam), 0.0, cfg, SphericalClock::none);
        w.reserve(s.samples.size());
        for (auto& x : s.samples) w.push_back(std::exp(-n * lam * t - lam * x.log_trig_end));
    } else {
        auto s = sample_radial_hyperbolic(g.n, lam, 0.0, cfg, HyperbolicClock::none);
        w.reserve(s.samples.size());
        for (auto& x : s.samples) {
            // (cosh r)^{-lam} <= 1
            if (!(-lam * x.log_trig_end <= 0.0)) throw NumericError("Girsanov weight exceeds one");
            w.push_back(std::exp(n * lam * t - lam * x.log_trig_end));
        }
    }
    auto ms = mean_se(w);
    CfEstimate out;
    out.value = {ms.mean, 0.0};
    out.std_error = ms.se;
    out.n_samples = w.size();
    return out;
}

inline Stream<WindingSample> sample_winding(WindingGeometry g, double r0, const SimConfig& cfg) {
    if (g == WindingGeometry::cp1 && !(r0 > 0.0 && r0 < 0.5 * std::numbers::pi))
        throw DomainError("cp1 winding needs r0 in (0, pi/2)");
    if (g == WindingGeometry::ch1 && !(r0 > 0.0)) throw DomainError("ch1 winding needs r0 > 0");
    return detail::run_paths<WindingSample>(cfg, [&](std::uint64_t i, SamplerStats& st) {
        NormalStream z(cfg.master_seed, i, detail::radial_stream);
        double clk;
        if (g == WindingGeometry::cp1)
            clk = detail::spherical_path(0.0, 0.0, r0, cfg, SphericalClock::inv_sin2_2r, z, st).clock;
        else if (cfg.scheme == Scheme::log_clock)
            clk = detail::ch1_winding_clock(r0, cfg, z, st);
        else
            clk = detail::ch1_winding_clock_r(r0, cfg, z, st);
        NormalStream zf(cfg.master_seed, i, detail::fibre_stream);
        return WindingSample{std::sqrt(clk) * zf(), clk};
    });
}

inline Stream<PlanarSample> sample_planar_area(double t, const SimConfig& cfg) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    SimConfig c = cfg;
    c.horizon = t;
    return detail::run_paths<PlanarSample>(c, [&](std::uint64_t i, SamplerStats& st) {
        NormalStream z(c.master_seed, i, detail::radial_stream);
        double x = 0.0, y = 0.0, s = 0.0, tt = 0.0;
        while (tt < t) {
            double h = std::min(c.dt, t - tt);
            double sq = std::sqrt(h);
            double dx = sq * z(), dy = sq * z();
            s += x * dy - y * dx;  // midpoint rule: (x + dx/2) dy - (y + dy/2) dx
            x += dx;
            y += dy;
            tt = (t - tt <= h) ? t : tt + h;
            ++st.steps;
        }
        return PlanarSample{{x, y}, s};
    });
}

}  // namespace starea
