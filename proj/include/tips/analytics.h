// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstddef>
#include <span>

namespace tips {

/// Ratio of the 5th-percentile fee to the 95th-percentile fee observed on
/// Bitcoin. Only used as a reference point for the epsilon < f_m / f_1 check.
inline constexpr double kBitcoinFeeRatioOmega = 0.0304;

struct SystemParams {
    double lambda = 0.5;
    double delta = 10.0;
    double tau = 0.1;
    std::size_t n = 2000;
    std::size_t m = 10000;
    double epsilon = 0.0217;
    double bits_per_tx = 8.0;
    double tx_size_bits = 4000.0;
    double header_timeout = 30.0;
    double alpha = 0.0;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

/// U(p) = (m - sum (1 - p_i) e^{-lambda d p_i}) / (n (lambda d + 1)), with d
/// the effective delay (Delta for the standard protocol, tau for TIPS).
double utilization(std::span<const double> p, std::size_t n, double lambda, double delay);

/// lambda n U(p).
double throughput(std::span<const double> p, std::size_t n, double lambda, double delay);

/// (1/d) sum f_i (1 - e^{-lambda d p_i}); lambda * sum f_i p_i when d = 0.
double fee_service_rate(std::span<const double> p, std::span<const double> fees, double lambda, double delay);

/// Bound xi on the best deviation gain from the random strategy.
double random_gap_xi(std::span<const double> fees, std::size_t n, double lambda, double delay);

/// Bound eta = |n (1 - phi(lambda tau)) f_n| on the deviation gain from top-n.
double topn_gap_eta(std::span<const double> fees, std::size_t n, double lambda, double tau);

/// Largest tau for which top-n is the unique equilibrium:
/// phi^{-1}(f_{n+1} / f_n) / lambda.
double topn_uniqueness_threshold(double f_n, double f_n_plus_1, double lambda);

/// (1 - e^{-lambda tau}) / (floor(m/n) - P[Poisson(lambda tau) <= floor(m/n)]).
double efficiency_lower_bound(double lambda, double tau, std::size_t n, std::size_t m);

/// 1 / (lambda tau + 1).
double efficiency_lower_bound_alt(double lambda, double tau);

/// Limit throughput as block size grows: 1 / (d Delta / d n).
double limit_tps(double marginal_delay_per_tx);

/// TIPS over standard limit throughput: transaction size / filter bits per tx.
double limit_tps_ratio(double tx_size_bits, double bits_per_tx);

/// (1/lambda)(e^{alpha lambda T} - 1).
double delay_attack_expectation(double alpha, double lambda, double header_timeout);

} // namespace tips
