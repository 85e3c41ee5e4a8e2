// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/strategies.h"

#include "tips/numeric.h"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tips {

double reward_coefficient(double p, double lambda, double delay) noexcept {
    return numeric::phi(lambda * delay * p);
}

double reward_coefficient_inverse(double y, double lambda, double delay) noexcept {
    const double a = lambda * delay;
    if (y >= 1.0) return 0.0;
    if (!(a > 0.0) || y <= numeric::phi(a)) return 1.0;
    return std::min(1.0, numeric::phi_inverse(y) / a);
}

double expected_revenue(std::span<const double> p, std::span<const double> p_others, std::span<const double> fees,
                        double lambda, double delay) {
    if (p.size() != fees.size() || p_others.size() != fees.size())
        throw std::invalid_argument("strategy and fee vectors differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < fees.size(); ++i) {
        if (p[i] == 0.0) continue;
        total += p[i] * fees[i] * reward_coefficient(p_others[i], lambda, delay);
    }
    return total;
}

InclusionStrategy strategy_random(std::size_t m, std::size_t n) {
    if (m == 0) throw std::invalid_argument("pool size m must be at least 1");
    if (n > m) throw std::invalid_argument("block size n exceeds pool size m");
    return InclusionStrategy(m, static_cast<double>(n) / static_cast<double>(m));
}

namespace {

std::vector<std::size_t> descending_order(std::span<const double> fees) {
    std::vector<std::size_t> idx(fees.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fees[a] > fees[b]; });
    return idx;
}

// Spreads n - (number of positive fees) over the zero-fee entries.
void fill_zero_fees(InclusionStrategy& p, std::span<const double> fees, double leftover) {
    std::size_t zeros = 0;
    for (double f : fees) zeros += f == 0.0;
    if (zeros == 0 || leftover <= 0.0) return;
    const double share = leftover / static_cast<double>(zeros);
    for (std::size_t i = 0; i < fees.size(); ++i)
        if (fees[i] == 0.0) p[i] = share;
}

} // namespace

InclusionStrategy strategy_priority(std::span<const double> fees, std::size_t n) {
    const std::size_t m = fees.size();
    if (n > m) throw std::invalid_argument("block size n exceeds pool size m");
    for (double f : fees)
        if (!(f >= 0.0)) throw std::invalid_argument("fees must be non-negative");
    if (std::all_of(fees.begin(), fees.end(), [](double f) { return f == 0.0; })) return strategy_random(m, n);

    const std::vector<std::size_t> order = descending_order(fees);
    std::vector<double> suffix(m + 1, 0.0);
    for (std::size_t k = m; k-- > 0;) suffix[k] = suffix[k + 1] + fees[order[k]];

    InclusionStrategy p(m, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
        const double rest = suffix[k];
        if (rest == 0.0) {
            for (std::size_t j = 0; j < k; ++j) p[order[j]] = 1.0;
            fill_zero_fees(p, fees, static_cast<double>(n - k));
            return p;
        }
        const double kappa = static_cast<double>(n - k) / rest;
        if (kappa * fees[order[k]] <= 1.0) {
            for (std::size_t j = 0; j < k; ++j) p[order[j]] = 1.0;
            for (std::size_t j = k; j < m; ++j) p[order[j]] = kappa * fees[order[j]];
            return p;
        }
    }
    // k = n always satisfies the test (kappa = 0); not reached.
    return p;
}

InclusionStrategy strategy_top_n(std::span<const double> fees, std::size_t n) {
    InclusionStrategy p(fees.size(), 0.0);
    std::fill_n(p.begin(), std::min(n, p.size()), 1.0);
    return p;
}

namespace {

class EquilibriumSolver {
public:
    EquilibriumSolver(std::span<const double> fees, std::size_t n, double lambda, double delay)
        : fees_(fees), n_(static_cast<double>(n)), lambda_(lambda), delay_(delay),
          r_one_(reward_coefficient(1.0, lambda, delay)) {}

    // F_l(c) = sum_{i<=l} min{r^{-1}(c/f_i), 1} - n, l counted from 1.
    double F(std::size_t l, double c) const {
        // Entries with c/f_i <= r(1) saturate at 1; they form a prefix.
        const double saturation_fee = c / r_one_;
        const auto first_free = std::partition_point(
            fees_.begin(), fees_.begin() + static_cast<std::ptrdiff_t>(l),
            [&](double f) { return f >= saturation_fee; });
        const std::size_t saturated = static_cast<std::size_t>(first_free - fees_.begin());
        double sum = static_cast<double>(saturated);
        for (std::size_t i = saturated; i < l; ++i) sum += reward_coefficient_inverse(c / fees_[i], lambda_, delay_);
        return sum - n_;
    }

    double G(std::size_t l) const { return F(l, fees_[l - 1]); }

private:
    std::span<const double> fees_;
    double n_;
    double lambda_;
    double delay_;
    double r_one_;
};

} // namespace

EquilibriumSolution equilibrium_strategy(std::span<const double> fees, std::size_t n, double lambda, double delay) {
    const std::size_t m = fees.size();
    if (n > m) throw std::invalid_argument("block size n exceeds pool size m");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(delay >= 0.0)) throw std::invalid_argument("delay must be non-negative");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(fees[i] >= 0.0)) throw std::invalid_argument("fees must be non-negative");
        if (i > 0 && fees[i] > fees[i - 1]) throw std::invalid_argument("fees must be sorted in descending order");
    }

    EquilibriumSolution sol;
    sol.strategy.assign(m, 0.0);
    if (n == 0) return sol;

    std::size_t positive = 0;
    while (positive < m && fees[positive] > 0.0) ++positive;
    if (positive <= n) {
        std::fill_n(sol.strategy.begin(), positive, 1.0);
        fill_zero_fees(sol.strategy, fees, static_cast<double>(n - positive));
        sol.cutoff_index = positive;
        sol.threshold = 0.0;
        return sol;
    }
    if (lambda * delay == 0.0) {
        std::fill_n(sol.strategy.begin(), n, 1.0);
        sol.cutoff_index = n;
        sol.threshold = fees[n - 1];
        return sol;
    }

    const std::span<const double> live = fees.first(positive);
    const EquilibriumSolver solver(live, n, lambda, delay);

    // G(l) = F_l(f_l) is non-decreasing in l and G(n) < 0, so l* is the last
    // l with G(l) <= 0.
    std::size_t lo = n;
    std::size_t hi = positive + 1;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (solver.G(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const std::size_t l_star = lo;

    // F_{l*} is non-increasing in c, >= 0 at r(1) f_{l*} and <= 0 at f_{l*}.
    auto F = [&](double c) { return solver.F(l_star, c); };
    double c_hi = live[l_star - 1];
    double c_lo = reward_coefficient(1.0, lambda, delay) * c_hi;
    double f_hi = F(c_hi);
    double f_lo = F(c_lo);
    if (f_hi > 0.0 || f_lo < 0.0)
        throw RootBracketError("equilibrium root not bracketed: F(" + std::to_string(c_lo) + ") = " +
                               std::to_string(f_lo) + ", F(" + std::to_string(c_hi) + ") = " +
                               std::to_string(f_hi));
    double c = c_hi;
    if (f_hi != 0.0 && f_lo != 0.0) {
        boost::uintmax_t max_iter = 200;
        const auto bracket = boost::math::tools::toms748_solve(F, c_lo, c_hi, f_lo, f_hi,
                                                               boost::math::tools::eps_tolerance<double>(50), max_iter);
        c = F(bracket.second) <= 0.0 ? bracket.second : bracket.first;
        if (F(c) > 0.0) c = c_hi;
    } else if (f_lo == 0.0 && f_hi != 0.0) {
        c = c_lo;
    }

    double sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < l_star; ++i) {
        sol.strategy[i] = reward_coefficient_inverse(c / live[i], lambda, delay);
        sum += sol.strategy[i];
        free_count += sol.strategy[i] < 1.0;
    }
    // Remove the root-finding residue so that the probabilities sum to n.
    const double residue = static_cast<double>(n) - sum;
    if (residue != 0.0 && free_count > 0) {
        const double share = residue / static_cast<double>(free_count);
        for (std::size_t i = 0; i < l_star; ++i)
            if (sol.strategy[i] < 1.0) sol.strategy[i] = std::clamp(sol.strategy[i] + share, 0.0, 1.0);
    }
    sol.cutoff_index = l_star;
    sol.threshold = c;
    return sol;
}

BestResponse best_response(std::span<const double> p_others, std::span<const double> fees, std::size_t n,
                           double lambda, double delay) {
    if (p_others.size() != fees.size()) throw std::invalid_argument("strategy and fee vectors differ in length");
    const std::size_t m = fees.size();
    if (n > m) throw std::invalid_argument("block size n exceeds pool size m");
    std::vector<double> value(m);
    for (std::size_t i = 0; i < m; ++i) value[i] = fees[i] * reward_coefficient(p_others[i], lambda, delay);
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                      [&](std::size_t a, std::size_t b) { return value[a] > value[b] || (value[a] == value[b] && a < b); });
    BestResponse out;
    out.strategy.assign(m, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        out.strategy[idx[k]] = 1.0;
        out.revenue += value[idx[k]];
    }
    return out;
}

std::vector<std::size_t> systematic_sample(std::span<const double> p, double u) {
    double total = 0.0;
    for (double x : p) total += x;
    const auto target = static_cast<std::size_t>(std::llround(total));
    std::vector<std::size_t> picked;
    picked.reserve(target);
    double acc = 0.0;
    double next = u;
    for (std::size_t i = 0; i < p.size() && picked.size() < target; ++i) {
        acc += p[i];
        if (next < acc) {
            picked.push_back(i);
            next += 1.0;
        }
    }
    // Rounding in the running sum can leave the last point just past the end.
    for (std::size_t i = p.size(); i-- > 0 && picked.size() < target;) {
        if (p[i] > 0.0 && std::find(picked.begin(), picked.end(), i) == picked.end()) picked.push_back(i);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

} // namespace tips
