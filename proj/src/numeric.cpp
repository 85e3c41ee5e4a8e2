// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/numeric.h"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/lambert_w.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tips::numeric {

double phi(double x) noexcept {
    if (std::abs(x) < 1e-6) {
        return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    }
    return -std::expm1(-x) / x;
}

double phi_derivative(double x) noexcept {
    if (std::abs(x) < 1e-4) {
        return -0.5 + x / 3.0 - x * x / 8.0;
    }
    // (e^{-x}(1 + x) - 1) / x^2
    return (std::exp(-x) * (1.0 + x) - 1.0) / (x * x);
}

double phi_inverse(double y) noexcept {
    if (!(y < 1.0)) return 0.0;
    if (!(y > 0.0)) return std::numeric_limits<double>::infinity();

    double x;
    if (y > 1.0 - 1e-4) {
        // phi(x) ~ 1 - x/2 + x^2/6, so x ~ 2(1-y) + (2/3)(1-y)^2.
        const double d = 1.0 - y;
        x = 2.0 * d + (2.0 / 3.0) * d * d;
    } else {
        // 1 - e^{-x} = y x  <=>  x = 1/y + W0(-(1/y) e^{-1/y}).
        const double inv = 1.0 / y;
        const double arg = std::max(-inv * std::exp(-inv), -std::exp(-1.0));
        x = inv + boost::math::lambert_w0(arg);
    }

    // phi is strictly decreasing: keep a bracket and polish with Newton.
    double lo = 0.0;
    double hi = std::max(2.0 / y, 1.0);
    x = std::clamp(x, lo, hi);
    for (int iter = 0; iter < 50; ++iter) {
        const double f = phi(x) - y;
        if (f > 0.0) lo = x; else hi = x;
        if (std::abs(f) <= 1e-15) break;
        const double slope = phi_derivative(x);
        double next = x - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * std::max(1.0, x)) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

double poisson_cdf(std::uint64_t k, double mean) {
    if (mean <= 0.0) return 1.0;
    return boost::math::gamma_q(static_cast<double>(k) + 1.0, mean);
}

} // namespace tips::numeric
