// Independent numerical oracles used by the tests
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Maximiser of a unimodal f on [a, b] by golden-section search.
inline double golden_section_max(const std::function<double(double)> &f, double a, double b, double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d, d = c, fd = fc;
            c = b - g * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + g * (b - a), fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Brute-force argmax over n+1 equally spaced points.
inline double grid_argmax(const std::function<double(double)> &f, double a, double b, int n) {
    double best_x = a, best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double x = a + (b - a) * i / n;
        const double v = f(x);
        if (v > best) best = v, best_x = x;
    }
    return best_x;
}

/// Grid search refined by a local golden-section pass.
inline double refined_argmax(const std::function<double(double)> &f, double a, double b, int n, double tol) {
    const double x = grid_argmax(f, a, b, n);
    const double h = (b - a) / n;
    return golden_section_max(f, std::max(a, x - h), std::min(b, x + h), tol);
}

template <typename F>
auto central_first(const F &f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <typename F>
auto central_second(const F &f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Kolmogorov-Smirnov statistic of samples against a CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)> &cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double c = cdf(xs[i]);
        d = std::max({d, c - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - c});
    }
    return d;
}

/// Asymptotic 0.1% critical value of the one-sample KS statistic.
inline double ks_critical_001(std::size_t n) { return 1.949 / std::sqrt(static_cast<double>(n)); }

inline double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

} // namespace oracle
