// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tips {

/// Inclusion probabilities over a pool sorted by descending value.
using InclusionStrategy = std::vector<double>;

/// r(p | delay) = (1 - e^{-lambda delay p}) / (lambda delay p); 1 in the limit.
double reward_coefficient(double p, double lambda, double delay) noexcept;

/// Inverse of r on [r(1), 1]. Returns 1 for y <= r(1) and 0 for y >= 1.
double reward_coefficient_inverse(double y, double lambda, double delay) noexcept;

/// R(p | p') = sum_i p_i f_i r(p'_i).
double expected_revenue(std::span<const double> p, std::span<const double> p_others, std::span<const double> fees,
                        double lambda, double delay);

InclusionStrategy strategy_random(std::size_t m, std::size_t n);

/// p_i = min(1, kappa f_i) with sum n. All-zero fees fall back to random.
InclusionStrategy strategy_priority(std::span<const double> fees, std::size_t n);

InclusionStrategy strategy_top_n(std::span<const double> fees, std::size_t n);

struct EquilibriumSolution {
    InclusionStrategy strategy;
    std::size_t cutoff_index = 0; // l*, 1-based count of entries that may get p > 0
    double threshold = 0.0;       // c_{l*}
};

class RootBracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Symmetric equilibrium p*(delay). Fees must be sorted descending and
/// non-negative; zero-fee entries get p = 0 unless the positive ones cannot
/// absorb n.
EquilibriumSolution equilibrium_strategy(std::span<const double> fees, std::size_t n, double lambda, double delay);

/// Exact best response against p': mass n on the largest f_i r(p'_i).
struct BestResponse {
    InclusionStrategy strategy;
    double revenue = 0.0;
};
BestResponse best_response(std::span<const double> p_others, std::span<const double> fees, std::size_t n,
                           double lambda, double delay);

/// Systematic sampling: returns round(sum p) distinct indices, index i drawn
/// with probability exactly p_i. u is the uniform offset in [0, 1).
std::vector<std::size_t> systematic_sample(std::span<const double> p, double u);

} // namespace tips
