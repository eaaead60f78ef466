#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace starea {

struct CfEstimate {
    std::complex<double> value{1.0, 0.0};
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
};

struct SampleSet {
    std::vector<double> values;
    std::string seed_provenance;
};

// pairwise summation of f(x_i)
template <class F>
double pairwise_sum(const double* x, std::size_t n, F&& f) {
    if (n <= 64) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += f(x[i]);
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h, f) + pairwise_sum(x + h, n - h, f);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size(), [](double x) { return x; });
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
    if (v.empty()) throw EmptySample("mean of an empty sample");
    const double n = double(v.size());
    double m = pairwise_sum(v) / n;
    if (v.size() < 2) return {m, 0.0};
    double ss = pairwise_sum(v.data(), v.size(), [m](double x) { return (x - m) * (x - m); });
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

inline CfEstimate empirical_cf(const SampleSet& s, double lam) {
    const auto& x = s.values;
    if (x.empty()) throw EmptySample("empirical_cf on an empty sample");
    const std::size_t n = x.size();
    CfEstimate out;
    out.n_samples = n;
    if (lam == 0.0) return out;
    double mc = pairwise_sum(x.data(), n, [lam](double v) { return std::cos(lam * v); }) / n;
    double ms = pairwise_sum(x.data(), n, [lam](double v) { return std::sin(lam * v); }) / n;
    out.value = {mc, ms};
    if (n > 1) {
        double vc = pairwise_sum(x.data(), n, [&](double v) { double d = std::cos(lam * v) - mc; return d * d; });
        double vs = pairwise_sum(x.data(), n, [&](double v) { double d = std::sin(lam * v) - ms; return d * d; });
        vc /= (n - 1.0);
        vs /= (n - 1.0);
        out.std_error = std::sqrt((vc + vs) / n);
    }
    return out;
}

// P(K > x) for the Kolmogorov distribution
inline double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    double p;
    if (x < 1.18) {
        // Jacobi theta form converges fast for small x
        double s = 0.0;
        for (int k = 1; k <= 100; ++k) {
            double term = std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * std::numbers::pi * std::numbers::pi / (8.0 * x * x));
            s += term;
            if (term < 1e-300) break;
        }
        p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s;
    } else {
        double s = 0.0;
        for (int k = 1; k <= 100; ++k) {
            double term = std::exp(-2.0 * k * k * x * x);
            s += (k % 2 == 1) ? term : -term;
            if (term < 1e-300) break;
        }
        p = 2.0 * s;
    }
    return std::clamp(p, 0.0, 1.0);
}

struct KsResult {
    double d = 0.0;
    double p_value = 1.0;
};

inline KsResult ks_statistic(const SampleSet& s, const std::function<double(double)>& cdf) {
    if (s.values.empty()) throw EmptySample("ks_statistic on an empty sample");
    std::vector<double> x = s.values;
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

struct HistogramBin {
    double center = 0.0;
    double density = 0.0;
    double std_error = 0.0;
};

struct Histogram {
    std::vector<HistogramBin> bins;
    double width = 0.0;
    double out_of_range = 0.0;  // fraction of samples outside the range
};

inline Histogram histogram_density(const SampleSet& s, int bins, std::pair<double, double> range) {
    if (s.values.empty()) throw EmptySample("histogram of an empty sample");
    if (bins < 2) throw DomainError("histogram needs at least 2 bins");
    auto [lo, hi] = range;
    if (!(hi > lo)) throw DomainError("histogram range is degenerate");
    Histogram h;
    h.width = (hi - lo) / bins;
    std::vector<std::uint64_t> count(bins, 0);
    std::uint64_t outside = 0;
    for (double v : s.values) {
        if (!(v >= lo && v < hi)) {
            ++outside;
            continue;
        }
        int k = std::min(bins - 1, int((v - lo) / h.width));
        ++count[k];
    }
    const double n = double(s.values.size());
    h.bins.resize(bins);
    for (int k = 0; k < bins; ++k) {
        double p = count[k] / n;
        h.bins[k] = {lo + (k + 0.5) * h.width, p / h.width, std::sqrt(p * (1.0 - p) / n) / h.width};
    }
    h.out_of_range = outside / n;
    return h;
}

}  // namespace starea
