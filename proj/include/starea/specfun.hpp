#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <variant>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace starea {

enum class Regime { trigonometric, hyperbolic };

struct JacobiParams {
    double alpha = 0.0;
    double beta = 0.0;
    Regime regime = Regime::trigonometric;

    JacobiParams() = default;
    JacobiParams(double a, double b, Regime reg = Regime::trigonometric)
        : alpha(a), beta(b), regime(reg) {
        if (!(a > -1.0) || !(b > -1.0))
            throw DomainError("Jacobi parameters must exceed -1");
    }
};

inline double log_gamma(double x) { return boost::math::lgamma(x); }

// ln(Gamma(a)/Gamma(b))
inline double log_gamma_ratio(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw DomainError("log_gamma_ratio needs positive arguments");
    if (a == b) return 0.0;
    // shift down to avoid cancellation of two large lgammas when a-b is an integer
    double d = a - b;
    if (std::abs(d) <= 64.0 && d == std::round(d)) {
        double lo = std::min(a, b), s = 0.0;
        for (int k = 0; k < static_cast<int>(std::abs(d)); ++k) s += std::log(lo + k);
        return d > 0 ? s : -s;
    }
    return log_gamma(a) - log_gamma(b);
}

// P_m(1) and |P_m(-1)| in log form
inline double jacobi_log_at_one(int m, double alpha) {
    return log_gamma(m + alpha + 1.0) - log_gamma(m + 1.0) - log_gamma(alpha + 1.0);
}

// Fills out[0..m] with P_0(x)..P_m(x).
template <class Vec>
void jacobi_poly_all(int m, double a, double b, double x, Vec& out) {
    out[0] = 1.0;
    if (m == 0) return;
    out[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    const double ab = a + b, a2b2 = a * a - b * b;
    for (int k = 1; k < m; ++k) {
        double s = 2.0 * k + ab;
        double c0 = 2.0 * (k + 1) * (k + ab + 1.0) * s;
        double c1 = (s + 1.0) * ((s + 2.0) * s * x + a2b2);
        double c2 = 2.0 * (k + a) * (k + b) * (s + 2.0);
        out[k + 1] = (c1 * out[k] - c2 * out[k - 1]) / c0;
    }
}

inline double jacobi_poly(int m, const JacobiParams& p, double x) {
    if (m < 0) throw DomainError("jacobi_poly: negative degree");
    if (!(std::abs(x) <= 1.0)) throw DomainError("jacobi_poly: |x| > 1");
    if (m == 0) return 1.0;
    double pm2 = 1.0, pm1 = (p.alpha + 1.0) + 0.5 * (p.alpha + p.beta + 2.0) * (x - 1.0);
    const double ab = p.alpha + p.beta, a2b2 = p.alpha * p.alpha - p.beta * p.beta;
    for (int k = 1; k < m; ++k) {
        double s = 2.0 * k + ab;
        double c0 = 2.0 * (k + 1) * (k + ab + 1.0) * s;
        double c1 = (s + 1.0) * ((s + 2.0) * s * x + a2b2);
        double c2 = 2.0 * (k + p.alpha) * (k + p.beta) * (s + 2.0);
        double next = (c1 * pm1 - c2 * pm2) / c0;
        pm2 = pm1;
        pm1 = next;
    }
    return pm1;
}

struct CauchyLaw {
    double scale;
    explicit CauchyLaw(double s) : scale(s) {
        if (!(s > 0.0)) throw DomainError("Cauchy scale must be positive");
    }
    double pdf(double x) const { return scale / (std::numbers::pi * (scale * scale + x * x)); }
    double cdf(double x) const { return 0.5 + std::atan(x / scale) / std::numbers::pi; }
};

struct NormalLaw {
    double mean = 0.0;
    double variance = 1.0;
    NormalLaw(double m, double v) : mean(m), variance(v) {
        if (!(v >= 0.0)) throw DomainError("normal variance must be nonnegative");
    }
    double cdf(double x) const {
        if (variance == 0.0) return x < mean ? 0.0 : 1.0;
        return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
    }
};

using ReferenceLaw = std::variant<CauchyLaw, NormalLaw>;

inline std::complex<double> reference_cf(const ReferenceLaw& law, double lambda) {
    if (auto c = std::get_if<CauchyLaw>(&law))
        return {std::exp(-c->scale * std::abs(lambda)), 0.0};
    const auto& g = std::get<NormalLaw>(law);
    return std::exp(std::complex<double>(-0.5 * g.variance * lambda * lambda, g.mean * lambda));
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace starea
