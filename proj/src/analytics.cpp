// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/analytics.h"

#include "tips/numeric.h"

#include <cmath>
#include <stdexcept>

namespace tips {

void SystemParams::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(tau > 0.0 && tau <= delta)) throw std::invalid_argument("need 0 < tau <= delta");
    if (n < 1 || n > m) throw std::invalid_argument("need 1 <= n <= m");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0,1)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0,1]");
    if (!(bits_per_tx > 0.0) || !(tx_size_bits > 0.0)) throw std::invalid_argument("sizes must be positive");
    if (!(header_timeout >= 0.0)) throw std::invalid_argument("header timeout must be non-negative");
}

double utilization(std::span<const double> p, std::size_t n, double lambda, double delay) {
    if (n == 0) throw std::invalid_argument("block size n must be positive");
    const double a = lambda * delay;
    // m - sum (1 - p_i) e^{-a p_i} = sum [p_i e^{-a p_i} - expm1(-a p_i)], which
    // keeps precision when a is small.
    double numer = 0.0;
    for (double pi : p) numer += pi * std::exp(-a * pi) - std::expm1(-a * pi);
    return numer / (static_cast<double>(n) * (a + 1.0));
}

double throughput(std::span<const double> p, std::size_t n, double lambda, double delay) {
    return lambda * static_cast<double>(n) * utilization(p, n, lambda, delay);
}

double fee_service_rate(std::span<const double> p, std::span<const double> fees, double lambda, double delay) {
    if (p.size() != fees.size()) throw std::invalid_argument("strategy and fee vectors differ in length");
    double total = 0.0;
    if (delay == 0.0) {
        for (std::size_t i = 0; i < p.size(); ++i) total += fees[i] * p[i];
        return lambda * total;
    }
    for (std::size_t i = 0; i < p.size(); ++i) total += fees[i] * -std::expm1(-lambda * delay * p[i]);
    return total / delay;
}

double random_gap_xi(std::span<const double> fees, std::size_t n, double lambda, double delay) {
    const std::size_t m = fees.size();
    if (n == 0 || n > m) throw std::invalid_argument("need 1 <= n <= m");
    double top = 0.0;
    double all = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        all += fees[i];
        if (i < n) top += fees[i];
    }
    const double nn = static_cast<double>(n);
    const double gap = top / nn - all / static_cast<double>(m);
    return nn * numeric::phi(lambda * delay * nn / static_cast<double>(m)) * gap;
}

double topn_gap_eta(std::span<const double> fees, std::size_t n, double lambda, double tau) {
    if (n == 0 || n > fees.size()) throw std::invalid_argument("need 1 <= n <= m");
    return std::abs(static_cast<double>(n) * (1.0 - numeric::phi(lambda * tau)) * fees[n - 1]);
}

double topn_uniqueness_threshold(double f_n, double f_n_plus_1, double lambda) {
    if (!(f_n > 0.0) || !(f_n_plus_1 >= 0.0) || f_n_plus_1 > f_n)
        throw std::invalid_argument("need 0 <= f_{n+1} <= f_n and f_n > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return numeric::phi_inverse(f_n_plus_1 / f_n) / lambda;
}

double efficiency_lower_bound(double lambda, double tau, std::size_t n, std::size_t m) {
    if (n == 0 || n > m) throw std::invalid_argument("need 1 <= n <= m");
    const std::uint64_t k = m / n;
    const double mean = lambda * tau;
    return -std::expm1(-mean) / (static_cast<double>(k) - numeric::poisson_cdf(k, mean));
}

double efficiency_lower_bound_alt(double lambda, double tau) {
    return 1.0 / (lambda * tau + 1.0);
}

double limit_tps(double marginal_delay_per_tx) {
    if (!(marginal_delay_per_tx > 0.0)) throw std::invalid_argument("marginal delay must be positive");
    return 1.0 / marginal_delay_per_tx;
}

double limit_tps_ratio(double tx_size_bits, double bits_per_tx) {
    if (!(bits_per_tx > 0.0)) throw std::invalid_argument("bits per transaction must be positive");
    return tx_size_bits / bits_per_tx;
}

double delay_attack_expectation(double alpha, double lambda, double header_timeout) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return std::expm1(alpha * lambda * header_timeout) / lambda;
}

} // namespace tips
