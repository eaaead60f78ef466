#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "densities.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "simulate.hpp"
#include "stats.hpp"

namespace starea {

// E[exp(-lam^2/2 int tan^2) | r(t) = r] on CP^n
inline double cf_conditional_cp(int n, double lam, double t, double r, const SeriesControl& ctl = {}) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (!(lam >= 0.0)) throw DomainError("lam must be >= 0");
    if (!(r >= 0.0 && r < 0.5 * std::numbers::pi)) throw DomainError("r must lie in [0, pi/2)");
    if (lam == 0.0) return 1.0;
    // the densities share the factor sin^{2n-1} r cos r; their ratio leaves cos^{2 lam} r
    double num = detail::spherical_series(n - 1.0, lam, t, 0.0, r, ctl, false).value;
    double den = detail::spherical_series(n - 1.0, 0.0, t, 0.0, r, ctl, false).value;
    if (den < 1e-300) throw NumericError("cf_conditional_cp: reference density underflows");
    return std::exp(-n * lam * t + lam * std::log(std::cos(r))) * num / den;
}

inline double cf_marginal_cp(int n, double lam, double t, const SeriesControl& ctl = {},
                             const QuadratureControl& qctl = {}) {
    if (n < 1) throw DomainError("n must be >= 1");
    qctl.validate();
    const double l = std::abs(lam);
    if (l == 0.0) return 1.0;
    JacobiParams p(n - 1.0, l);
    auto f = [&](double r) {
        double c = std::cos(r);
        if (c <= 0.0) return 0.0;
        return spherical_density(p, t, 0.0, r, ctl).value * std::pow(c, -l);
    };
    auto res = integrate_or_throw(f, 0.0, 0.5 * std::numbers::pi, qctl.abs_tol, qctl.rel_tol, qctl.max_subdivisions);
    return std::exp(-n * l * t) * res.value;
}

inline CfEstimate cf_marginal_ch(int n, double lam, const SimConfig& cfg) {
    if (lam == 0.0) {
        cfg.validate();
        CfEstimate one;
        one.n_samples = cfg.paths;
        return one;
    }
    return girsanov_cf_estimator(Geometry::ch(n), std::abs(lam), cfg);
}

// E[exp(i lam S_t) | Z_t = z] for planar Brownian motion
inline double levy_cf(double lam, double t, std::complex<double> z) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    const double x = lam * t, z2 = std::norm(z);
    double ratio, excess;  // x/sinh x and x coth x - 1
    if (std::abs(x) < 1e-6) {
        double x2 = x * x;
        ratio = 1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0;
        excess = x2 / 3.0 - x2 * x2 / 45.0;
    } else {
        double ax = std::abs(x);
        ratio = (ax > 700.0) ? 2.0 * ax * std::exp(-ax) : ax / std::sinh(ax);
        excess = ax / std::tanh(ax) - 1.0;
    }
    return ratio * std::exp(-z2 / (2.0 * t) * excess);
}

// E[exp(i lam S_t)] by Gauss-Hermite quadrature of levy_cf over Z_t ~ N(0, t I)
inline double levy_unconditional_cf(double lam, double t, int nodes = 80) {
    auto gh = gauss_hermite(nodes);
    double s = 0.0, k = std::sqrt(2.0 * t);
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j)
            s += gh.weights[i] * gh.weights[j] * levy_cf(lam, t, {k * gh.nodes[i], k * gh.nodes[j]});
    return s / std::numbers::pi;
}

inline double winding_limit_cf(WindingGeometry g, double r0, double lam) {
    if (g == WindingGeometry::cp1) {
        if (!(r0 > 0.0 && r0 < 0.5 * std::numbers::pi)) throw DomainError("r0 must lie in (0, pi/2)");
        return std::exp(-2.0 * std::abs(lam));
    }
    if (!(r0 > 0.0)) throw DomainError("r0 must be positive");
    return std::pow(std::tanh(r0), std::abs(lam));
}

}  // namespace starea
