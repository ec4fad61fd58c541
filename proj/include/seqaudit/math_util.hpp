#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace seqaudit {

inline double clip(double x, double lo, double hi) {
    return std::min(std::max(x, lo), hi);
}

// log(exp(a) + exp(b)) without overflow.
inline double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> vals) {
    if (vals.empty()) return -std::numeric_limits<double>::infinity();
    const double hi = *std::max_element(vals.begin(), vals.end());
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double v : vals) acc += std::exp(v - hi);
    return hi + std::log(acc);
}

// Quantile with linear interpolation between closest ranks (the common
// "type 7" convention). Input need not be sorted.
inline double quantile(std::vector<double> vals, double q) {
    if (vals.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(vals.begin(), vals.end());
    const double pos = q * static_cast<double>(vals.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return vals[lo] + frac * (vals[hi] - vals[lo]);
}

} // namespace seqaudit
