#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

// m-th derivative at x of an analytic f by the Cauchy integral on a circle
template <class F>
double cauchy_derivative(F&& f, int m, double x, double radius, int nodes = 256) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < nodes; ++k) {
        double ph = 2.0 * std::numbers::pi * (k + 0.5) / nodes;
        std::complex<double> e(std::cos(ph), std::sin(ph));
        acc += f(x + radius * e) * std::pow(std::conj(e), m);
    }
    return (acc.real() / nodes) * std::tgamma(m + 1.0) / std::pow(radius, m);
}

// Rodrigues formula with the derivative taken numerically on a circle
inline double rodrigues_jacobi(int m, double a, double b, double x) {
    auto f = [&](std::complex<double> z) { return std::pow(1.0 - z, a + m) * std::pow(1.0 + z, b + m); };
    double rad = 0.5 * std::min(1.0 - x, 1.0 + x);
    double dm = cauchy_derivative(f, m, x, rad);
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign / (std::pow(2.0, m) * std::tgamma(m + 1.0)) * std::pow(1.0 - x, -a) * std::pow(1.0 + x, -b) * dm;
}

inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

// 1% critical values
inline double ks_critical_1pct(double n) { return 1.6276 / std::sqrt(n); }
inline double ks2_critical_1pct(double n, double m) { return 1.6276 * std::sqrt((n + m) / (n * m)); }

// Composite Simpson on [a,b]
template <class F>
double simpson(F&& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    double h = (b - a) / panels, s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace oracle
