#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fbmctrl {

// Neumaier compensated sum. Order-independent to ~1 ulp for the reductions
// used in moment estimates, so results do not drift with scheduling.
inline double compensated_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

// Unbiased sample variance (Bessel). Exactly zero for a constant sample.
inline double sample_variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    bool constant = true;
    for (double x : xs)
        if (x != xs[0]) {
            constant = false;
            break;
        }
    if (constant) return 0.0;
    const double m = mean(xs);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
    return compensated_sum(sq) / static_cast<double>(n - 1);
}

inline double standard_error(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

// Least-squares slope of y against x (used for log-log order fits).
inline double ls_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = mean(x), my = mean(y), sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

}  // namespace fbmctrl
