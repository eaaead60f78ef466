#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include "errors.hpp"

namespace starea {

struct QuadratureControl {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double max_window = 200.0;
    int max_subdivisions = 2000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
        if (!(max_window >= 1.0)) throw DomainError("max_window must be >= 1");
        if (max_subdivisions < 1) throw DomainError("max_subdivisions must be >= 1");
    }
};

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

// Gauss-Kronrod 10/21 abscissae and weights (QUADPACK qk21)
inline constexpr double xgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr double wgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double wg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

inline double mag(double x) { return std::abs(x); }
inline double mag(const std::complex<double>& z) { return std::abs(z); }

template <class T>
struct Panel {
    double a, b;
    T value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk21(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    T fc = f(c);
    T resk = fc * wgk[10];
    T resg{};
    for (int j = 0; j < 10; ++j) {
        double dx = h * xgk[j];
        T f1 = f(c - dx), f2 = f(c + dx);
        resk += (f1 + f2) * wgk[j];
        if (j % 2 == 1) resg += (f1 + f2) * wg[j / 2];
    }
    T vk = resk * h;
    double err = mag(vk - resg * h);
    // guard against error estimates below roundoff
    err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * mag(vk));
    return {a, b, vk, err};
}

}  // namespace detail

// Globally adaptive G10/K21 on [a,b]; splits the worst panel until the
// summed error estimate meets max(abs_tol, rel_tol*|I|).
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol, double rel_tol, int max_subdiv = 2000,
               int initial_panels = 1) {
    using T = std::decay_t<decltype(f(a))>;
    QuadResult<T> out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Panel<T>> heap;
    T total{};
    double err = 0.0;
    initial_panels = std::max(initial_panels, 1);
    for (int i = 0; i < initial_panels; ++i) {
        double lo = a + (b - a) * i / initial_panels;
        double hi = (i + 1 == initial_panels) ? b : a + (b - a) * (i + 1) / initial_panels;
        auto p = detail::gk21<T>(f, lo, hi);
        total += p.value;
        err += p.error;
        heap.push(p);
    }
    int panels = initial_panels;
    out.evaluations = 21 * initial_panels;
    while (err > std::max(abs_tol, rel_tol * detail::mag(total)) && panels < max_subdiv) {
        auto worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        auto l = detail::gk21<T>(f, worst.a, mid);
        auto r = detail::gk21<T>(f, mid, worst.b);
        out.evaluations += 42;
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++panels;
        if (panels % 64 == 0) {
            // resum to stop drift in the running totals
            auto copy = heap;
            T s{};
            double e = 0.0;
            while (!copy.empty()) {
                s += copy.top().value;
                e += copy.top().error;
                copy.pop();
            }
            total = s;
            err = e;
        }
    }
    out.value = total;
    out.error = err;
    out.converged = err <= std::max(abs_tol, rel_tol * detail::mag(total));
    return out;
}

template <class F>
auto integrate_or_throw(F&& f, double a, double b, double abs_tol, double rel_tol, int max_subdiv = 2000,
                        int initial_panels = 1) {
    auto r = integrate(f, a, b, abs_tol, rel_tol, max_subdiv, initial_panels);
    if (!r.converged) throw QuadratureFailure("adaptive quadrature did not reach its error target");
    return r;
}

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Hermite nodes/weights for weight exp(-x^2), Newton on the
// orthonormal recurrence.
inline GaussRule gauss_hermite(int n) {
    if (n < 1) throw DomainError("gauss_hermite: n must be positive");
    GaussRule g{std::vector<double>(n), std::vector<double>(n)};
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    double z = 0.0;
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * g.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * g.nodes[1];
        else
            z = 2.0 * z - g.nodes[i - 2];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        g.nodes[i] = z;
        g.nodes[n - 1 - i] = -z;
        g.weights[i] = g.weights[n - 1 - i] = 2.0 / (pp * pp);
    }
    if (n % 2 == 1) g.nodes[m - 1] = 0.0;
    return g;
}

}  // namespace starea
