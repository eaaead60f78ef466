#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace starea {

struct JointDensityValue {
    double value = 0.0;
    double est_error = 0.0;
    double imag_residue = 0.0;
};

namespace detail {

// cosh r cosh y - 1 without cancellation
inline double cosh_prod_m1(double r, double y) {
    double sr = std::sinh(0.5 * r), sy = std::sinh(0.5 * y);
    return 2.0 * sr * sr * std::cosh(y) + 2.0 * sy * sy;
}

// d = arcosh(1+x) and d/sinh d
inline void arcosh_ratio(double x, double& d, double& ratio) {
    if (x < 1e-12) {
        d = std::sqrt(2.0 * x);
        ratio = 1.0 - x / 3.0;
        return;
    }
    double sh = std::sqrt(x * (x + 2.0));
    d = std::log1p(x + sh);
    ratio = d / sh;
}

inline void check_inputs(double t, double r, const QuadratureControl& ctl) {
    ctl.validate();
    if (!(t > 0.0)) throw DomainError("time must be positive");
    if (!(r >= 0.0)) throw DomainError("r must be nonnegative");
}

// Integrates f over y in [-W, W], doubling W until tail(W) <= abs_tol/10.
template <class F, class Tail>
JointDensityValue windowed_y_integral(F&& f, Tail&& tail, double scale, const QuadratureControl& ctl) {
    double W = 8.0;
    while (scale * tail(W) > 0.1 * ctl.abs_tol) {
        W *= 2.0;
        if (W > ctl.max_window) {
            W = ctl.max_window;
            if (scale * tail(W) > ctl.abs_tol) throw WindowExhausted("y-window reached max_window before tail bound met");
            break;
        }
    }
    auto res = integrate(f, -W, W, ctl.abs_tol / scale, ctl.rel_tol, ctl.max_subdivisions, 2);
    if (!res.converged) throw QuadratureFailure("y-quadrature did not reach its error target");
    JointDensityValue out;
    out.value = scale * res.value.real();
    out.est_error = scale * res.error + scale * tail(W);
    out.imag_residue = scale * std::abs(res.value.imag());
    if (out.imag_residue > std::max(ctl.abs_tol, ctl.rel_tol * std::abs(out.value)) + out.est_error)
        throw QuadratureFailure("imaginary part of the y-quadrature does not vanish");
    return out;
}

}  // namespace detail

inline JointDensityValue ch1_joint_density(double t, double r, double theta, const QuadratureControl& ctl = {}) {
    detail::check_inputs(t, r, ctl);
    const double scale = std::exp(-0.5 * t - theta * theta / (2.0 * t)) / std::pow(2.0 * std::numbers::pi * t, 2);
    auto f = [&](double y) {
        double d, ratio;
        detail::arcosh_ratio(detail::cosh_prod_m1(r, y), d, ratio);
        double ex = std::exp(-(d - std::abs(y)) * (d + std::abs(y)) / (2.0 * t));
        double ph = -y * theta / t;
        return std::complex<double>(std::cos(ph), std::sin(ph)) * (ex * ratio);
    };
    // d >= |y| and x/sinh x decreasing: two-sided tail <= 4(W+1)e^{-W}/(1-e^{-2W})
    auto tail = [](double W) { return 4.0 * (W + 1.0) * std::exp(-W) / (1.0 - std::exp(-2.0 * W)); };
    return detail::windowed_y_integral(f, tail, scale, ctl);
}

namespace detail {

// E^{(n)}(c)/E(c) with E(w) = exp(-arcosh(w)^2/(2t)), c = 1 + x, by a
// trapezoid Cauchy integral on a circle inside the domain of analyticity.
inline double arcosh_gauss_derivative_ratio(int n, double t, double x, int nodes = 32) {
    double d, ratio;
    arcosh_ratio(x, d, ratio);
    const double c = 1.0 + x;
    double R = std::min(0.25 * (c + 1.0), 2.0 * t / ratio);
    std::complex<double> acc = 0.0;
    const double d2 = d * d;
    for (int k = 0; k < nodes; ++k) {
        double ph = 2.0 * std::numbers::pi * k / nodes;
        std::complex<double> e(std::cos(ph), std::sin(ph));
        std::complex<double> w = c + R * e;
        std::complex<double> a = std::acosh(w);
        std::complex<double> val = std::exp(-(a * a - d2) / (2.0 * t));
        acc += val * std::pow(std::conj(e), n);
    }
    double fact = std::exp(log_gamma(n + 1.0));
    return (acc.real() / nodes) * fact / std::pow(R, n);
}

}  // namespace detail

// CH^n joint density. The inner u-integral of the two-level representation is
// evaluated in closed form by residues: it equals pi (-1)^n / n! E^{(n)}(cosh r cosh y).
inline JointDensityValue chn_joint_density(int n, double t, double r, double theta, const QuadratureControl& ctl = {}) {
    if (n < 2) throw DomainError("chn_joint_density needs n >= 2");
    detail::check_inputs(t, r, ctl);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double scale = sign * 2.0 * std::numbers::pi * std::exp(-0.5 * n * n * t - theta * theta / (2.0 * t)) /
                         (std::pow(2.0 * std::numbers::pi, n + 2) * t);
    auto f = [&](double y) {
        double x = detail::cosh_prod_m1(r, y);
        double d, ratio;
        detail::arcosh_ratio(x, d, ratio);
        double ex = std::exp(-(d - std::abs(y)) * (d + std::abs(y)) / (2.0 * t));
        double rn = detail::arcosh_gauss_derivative_ratio(n, t, x);
        double ph = -y * theta / t;
        return std::complex<double>(std::cos(ph), std::sin(ph)) * (ex * rn);
    };
    // empirical tail: the integrand decays like e^{-n|y|} poly(|y|); bound the
    // remainder past W by |f(W)| times the decay length, doubled for both sides
    auto tail = [&](double W) {
        double fw = std::max(std::abs(f(W)), std::abs(f(0.5 * W)) * std::exp(-0.5 * n * W));
        return 2.0 * fw * (1.0 + W) / n;
    };
    auto out = detail::windowed_y_integral(f, tail, std::abs(scale), ctl);
    out.value *= sign;
    return out;
}

namespace detail {

inline double sech2(double x) {
    double e = std::exp(-2.0 * std::abs(x));
    return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

inline double loop_shape(double t, double theta) {
    return std::exp(-theta * theta / (2.0 * t)) * sech2(0.5 * std::numbers::pi * theta / t);
}

class LoopNormalizerCache {
  public:
    double get(double t, const QuadratureControl& ctl) {
        {
            std::shared_lock lock(mu_);
            auto it = cache_.find(t);
            if (it != cache_.end()) return it->second;
        }
        double W = 8.0 * (std::sqrt(t) + t);
        while (loop_shape(t, W) * W > 0.01 * ctl.abs_tol && W < 1e6) W *= 2.0;
        auto res = integrate([&](double th) { return loop_shape(t, th); }, 0.0, W, 0.5 * ctl.abs_tol, ctl.rel_tol,
                             ctl.max_subdivisions);
        if (!res.converged) throw QuadratureFailure("loop normalizer quadrature failed");
        double C = 2.0 * res.value;
        std::unique_lock lock(mu_);
        cache_.emplace(t, C);
        return C;
    }

  private:
    std::shared_mutex mu_;
    std::map<double, double> cache_;
};

inline LoopNormalizerCache& loop_cache() {
    static LoopNormalizerCache c;
    return c;
}

}  // namespace detail

// Conditional density of theta(t) given r(t)=0 on CH^1; its shape is the
// r=0 slice of ch1_joint_density.
inline double ch1_loop_area_density(double t, double theta, const QuadratureControl& ctl = {}) {
    ctl.validate();
    if (!(t > 0.0)) throw DomainError("time must be positive");
    return detail::loop_shape(t, theta) / detail::loop_cache().get(t, ctl);
}

}  // namespace starea
