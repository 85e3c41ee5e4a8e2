// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>

namespace tips::numeric {

/// phi(x) = (1 - e^{-x}) / x, with phi(0) = 1. Series below |x| < 1e-6.
double phi(double x) noexcept;

/// d phi / dx.
double phi_derivative(double x) noexcept;

/// Inverse of phi on x >= 0. Returns 0 for y >= 1 and +inf for y <= 0.
/// Lambert-W closed form followed by a bracketed Newton polish; the result
/// satisfies |phi(x) - y| <= 1e-12 for y in (0, 1).
double phi_inverse(double y) noexcept;

/// P[X <= k] for X ~ Poisson(mean), via the regularized incomplete gamma.
double poisson_cdf(std::uint64_t k, double mean);

} // namespace tips::numeric
