#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "specfun.hpp"

namespace starea {

struct SeriesControl {
    int max_terms = 500;
    double tail_tol = 1e-12;
    double min_time = 1e-3;

    void validate() const {
        if (max_terms < 1) throw DomainError("max_terms must be >= 1");
        if (!(tail_tol > 0.0)) throw DomainError("tail_tol must be positive");
        if (!(min_time > 0.0)) throw DomainError("min_time must be positive");
    }
};

struct DensityValue {
    double value = 0.0;
    double truncation_bound = 0.0;
    double rounding_bound = 0.0;  // floating-point error of the partial sum
    bool clipped = false;
    int terms = 0;
};

namespace detail {

// Term bounds b_m = exp(logb(m)) scanned until they are negligible against
// tol and decay geometrically; returns the smallest M whose discarded tail
// (including a geometric remainder past the scan) is <= tol, or -1.
template <class LogBound>
int truncation_index(LogBound&& logb, double tol, int max_terms, double& tail_out) {
    std::vector<double> b;
    const int scan_cap = 4 * max_terms + 64;
    double rem = 0.0;
    bool settled = false;
    for (int m = 0; m <= scan_cap; ++m) {
        double v = std::exp(logb(m));
        b.push_back(v);
        if (m >= 2 && v < 1e-3 * tol) {
            double q = v / b[m - 1];
            if (q < 0.5) {
                rem = v * q / (1.0 - q);
                settled = true;
                break;
            }
        }
        if (m >= 2 && v == 0.0 && b[m - 1] == 0.0) {
            settled = true;
            break;
        }
    }
    if (!settled) {
        tail_out = std::numeric_limits<double>::infinity();
        return -1;
    }
    // suffix[m] = sum_{j>m} b_j + rem
    double suffix = rem;
    int M = static_cast<int>(b.size()) - 1;
    double tail_at_M = rem;
    for (int m = static_cast<int>(b.size()) - 1; m >= 0; --m) {
        // suffix currently = sum_{j>m} b_j + rem
        if (suffix <= tol) {
            M = m;
            tail_at_M = suffix;
        } else {
            break;
        }
        suffix += b[m];
    }
    tail_out = tail_at_M;
    return M;
}

inline double log_c(int m, double a, double b) {
    if (m == 0) return log_gamma(a + b + 2.0) - log_gamma(a + 1.0) - log_gamma(b + 1.0);
    return std::log(2.0 * m + a + b + 1.0) + log_gamma(m + a + b + 1.0) + log_gamma(m + 1.0) -
           log_gamma(m + a + 1.0) - log_gamma(m + b + 1.0);
}

// log max(|P_m(1)|, |P_m(-1)|)
inline double log_endpoint_max(int m, double a, double b) {
    return std::max(jacobi_log_at_one(m, a), jacobi_log_at_one(m, b));
}

inline void check_time(double t, const SeriesControl& ctl) {
    ctl.validate();
    if (!(t > 0.0)) throw DomainError("time must be positive");
    if (t < ctl.min_time) throw TimeTooSmall("time below the series guard min_time");
}

// Raw (unclipped) transition density of the spherical Jacobi diffusion in r.
// Without the prefactor, the bare sum over m is returned.
inline DensityValue spherical_series(double a, double b, double t, double r0, double r, const SeriesControl& ctl,
                                     bool with_prefactor = true) {
    check_time(t, ctl);
    const double half_pi = 0.5 * std::numbers::pi;
    if (!(r0 >= 0.0 && r0 <= half_pi) || !(r >= 0.0 && r <= half_pi))
        throw DomainError("radii must lie in [0, pi/2]");
    const double s = std::sin(r), c = std::cos(r);
    const double pref = with_prefactor ? 2.0 * std::pow(c, 2.0 * b + 1.0) * std::pow(s, 2.0 * a + 1.0) : 1.0;
    DensityValue out;
    if (pref == 0.0 || !std::isfinite(pref)) {
        out.value = std::isfinite(pref) ? 0.0 : pref;
        return out;
    }
    const bool origin = (r0 == 0.0);
    const double x0 = std::cos(2.0 * r0), x = std::cos(2.0 * r);
    const double ab1 = a + b + 1.0;
    auto lexp = [&](int m) { return -2.0 * m * (m + ab1) * t; };

    int M = 0;
    double tail = 0.0;
    const bool endpoint_bound = (a >= -0.5 && b >= -0.5);
    if (endpoint_bound) {
        auto logb = [&](int m) {
            double l = log_c(m, a, b) + lexp(m) + log_endpoint_max(m, a, b) + std::log(pref);
            l += origin ? jacobi_log_at_one(m, a) : log_endpoint_max(m, a, b);
            return l;
        };
        M = truncation_index(logb, ctl.tail_tol, ctl.max_terms, tail);
        if (M < 0 || M > ctl.max_terms)
            throw SeriesNotConverged("spherical density tail bound not met within max_terms");
    } else {
        M = ctl.max_terms;
        tail = 0.0;
    }

    std::vector<double> px(M + 1), p0(M + 1);
    jacobi_poly_all(M, a, b, x, px);
    if (!origin) jacobi_poly_all(M, a, b, x0, p0);
    double sum = 0.0, abs_sum = 0.0;
    int quiet = 0;
    for (int m = 0; m <= M; ++m) {
        double lc = log_c(m, a, b) + lexp(m);
        double term;
        if (origin)
            term = std::exp(lc + jacobi_log_at_one(m, a)) * px[m];
        else
            term = std::exp(lc) * p0[m] * px[m];
        sum += term;
        abs_sum += std::abs(term);
        if (!endpoint_bound) {
            // empirical stop: three consecutive terms below tol/10
            quiet = (std::abs(pref * term) < 0.1 * ctl.tail_tol) ? quiet + 1 : 0;
            if (quiet >= 3) {
                M = m;
                tail = 0.1 * ctl.tail_tol;
                break;
            }
        }
    }
    if (!endpoint_bound && quiet < 3)
        throw SeriesNotConverged("spherical density empirical tail rule not met within max_terms");
    out.value = pref * sum;
    out.truncation_bound = tail;
    out.rounding_bound = 4.0 * (M + 1) * std::numeric_limits<double>::epsilon() * pref * abs_sum;
    out.terms = M + 1;
    return out;
}

inline void clip(DensityValue& d) {
    if (d.value < 0.0) {
        d.truncation_bound = std::max(d.truncation_bound, -d.value);
        d.value = 0.0;
        d.clipped = true;
    }
}

}  // namespace detail

inline DensityValue spherical_density(const JacobiParams& p, double t, double r0, double r,
                                      const SeriesControl& ctl = {}) {
    if (p.regime != Regime::trigonometric) throw DomainError("spherical_density needs the trigonometric regime");
    if (p.alpha < 0.0 || p.beta < 0.0) throw DomainError("spherical_density needs alpha, beta >= 0");
    auto d = detail::spherical_series(p.alpha, p.beta, t, r0, r, ctl);
    detail::clip(d);
    return d;
}

inline double stationary_spherical_density(const JacobiParams& p, double r) {
    if (p.alpha < 0.0 || p.beta < 0.0) throw DomainError("stationary density needs alpha, beta >= 0");
    if (!(r >= 0.0 && r <= 0.5 * std::numbers::pi)) throw DomainError("r must lie in [0, pi/2]");
    double lc0 = detail::log_c(0, p.alpha, p.beta);
    return 2.0 * std::exp(lc0) * std::pow(std::cos(r), 2.0 * p.beta + 1.0) * std::pow(std::sin(r), 2.0 * p.alpha + 1.0);
}

namespace detail {

// Berger kernel, summing k = 0..K (k>0 paired with -k).
inline DensityValue berger_series(int n, double lam, double t, double r, double theta, bool limit_only,
                                  const SeriesControl& ctl) {
    check_time(t, ctl);
    if (n < 1) throw DomainError("n must be positive");
    if (!(r >= 0.0 && r <= 0.5 * std::numbers::pi)) throw DomainError("r must lie in [0, pi/2]");
    const double pref = std::exp(log_gamma(n)) / (2.0 * std::pow(std::numbers::pi, n + 1));
    const double cr = std::cos(r), x = std::cos(2.0 * r);
    const double a = n - 1.0;
    const double lcr = std::log(cr);

    auto log_coef = [&](int m, int k) {
        return std::log(2.0 * m + k + n) + log_gamma(m + k + n) - log_gamma(n) - log_gamma(m + k + 1.0);
    };
    auto log_exp = [&](int m, int k) {
        double lmk = 4.0 * m * (m + k + n) + 2.0 * k * n;
        return -0.5 * (lmk + double(k) * k * lam * lam) * t;
    };
    auto log_bound = [&](int m, int k) {
        double l = std::log(pref) + log_coef(m, k) + log_exp(m, k) + log_endpoint_max(m, a, k);
        if (k > 0) l += std::log(2.0) + (cr > 0.0 ? k * lcr : -std::numeric_limits<double>::infinity());
        return l;
    };

    // per-k total bounds
    std::vector<double> bk;
    const int kcap = limit_only ? 0 : ctl.max_terms;
    int K = 0;
    double ktail = 0.0;
    if (!limit_only) {
        auto logBk = [&](int k) {
            double s = 0.0, mx = -std::numeric_limits<double>::infinity();
            std::vector<double> ls;
            for (int m = 0;; ++m) {
                double l = log_bound(m, k);
                ls.push_back(l);
                mx = std::max(mx, l);
                if (m >= 2 && l < mx - 60.0 && l < ls[m - 1] - 0.7) break;
                if (m > 4 * ctl.max_terms + 64) break;
            }
            if (!std::isfinite(mx)) return mx;
            for (double l : ls) s += std::exp(l - mx);
            return mx + std::log(s);
        };
        K = truncation_index(logBk, 0.5 * ctl.tail_tol, kcap, ktail);
        if (K < 0 || K > ctl.max_terms) throw SeriesNotConverged("Berger kernel: k-series tail not met");
    }
    const double mtol = (limit_only ? 1.0 : 0.5) * ctl.tail_tol / (K + 1);
    double sum = 0.0, tail = ktail;
    int terms = 0;
    std::vector<double> pm;
    for (int k = 0; k <= K; ++k) {
        double tk = 0.0;
        int Mk = truncation_index([&](int m) { return log_bound(m, k); }, mtol, ctl.max_terms, tk);
        if (Mk < 0 || Mk > ctl.max_terms) throw SeriesNotConverged("Berger kernel: m-series tail not met");
        tail += tk;
        pm.assign(Mk + 1, 0.0);
        jacobi_poly_all(Mk, a, double(k), x, pm);
        double ks = 0.0;
        for (int m = 0; m <= Mk; ++m) ks += std::exp(log_coef(m, k) + log_exp(m, k)) * pm[m];
        double fac = (k == 0) ? 1.0 : 2.0 * std::cos(k * theta) * std::pow(cr, k);
        sum += fac * ks;
        terms += Mk + 1;
    }
    DensityValue out;
    out.value = pref * sum;
    out.truncation_bound = tail;
    out.terms = terms;
    return out;
}

}  // namespace detail

inline DensityValue berger_kernel(int n, double lam, double t, double r, double theta, const SeriesControl& ctl = {}) {
    if (!(lam > 0.0)) throw DomainError("Berger parameter must be positive");
    auto d = detail::berger_series(n, lam, t, r, theta, false, ctl);
    detail::clip(d);
    return d;
}

inline DensityValue berger_limit_kernel(int n, double t, double r, const SeriesControl& ctl = {}) {
    auto d = detail::berger_series(n, 1.0, t, r, 0.0, true, ctl);
    detail::clip(d);
    return d;
}

}  // namespace starea
