// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/validation.h"

#include "tips/analytics.h"
#include "tips/bloom.h"
#include "tips/metrics.h"
#include "tips/rng.h"
#include "tips/simengine.h"
#include "tips/strategies.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tips {

namespace {

// Tolerance in force: the check's own unless overridden.
struct Tol {
    const ValidationOptions& options;
    double operator()(double own, double expected) const {
        return options.relative_tolerance > 0.0 ? options.relative_tolerance * std::abs(expected) : own;
    }
};

CheckResult compare(std::string name, double measured, double expected, double tolerance, std::string detail = {}) {
    CheckResult r{std::move(name), std::abs(measured - expected) <= tolerance, measured, expected, tolerance,
                  std::move(detail)};
    return r;
}

// One-sided: measured >= expected - tolerance.
CheckResult at_least(std::string name, double measured, double expected, double tolerance, std::string detail = {}) {
    CheckResult r{std::move(name), measured >= expected - tolerance, measured, expected, tolerance,
                  std::move(detail)};
    return r;
}

TxId stream_id(RandomStream& rng) {
    TxId id{};
    for (int w = 0; w < 4; ++w) {
        const std::uint64_t v = rng.next_u64();
        for (int i = 0; i < 8; ++i) id[8 * w + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    return id;
}

CheckResult check_bloom_fpr(const ValidationOptions& o) {
    constexpr std::uint32_t b = 20000;
    constexpr std::uint32_t h = 5;
    constexpr std::size_t n = 2500;
    constexpr std::size_t probes = 200000;
    RandomStream rng(o.seed, 1, 1);
    BloomFilter filter(b, h);
    for (std::size_t i = 0; i < n; ++i) filter.insert(stream_id(rng));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probes; ++i) hits += filter.contains(stream_id(rng));
    const double expected = bf_false_positive_rate(b, h, n);
    return compare("bloom_fpr", static_cast<double>(hits) / probes, expected, Tol{o}(0.003, expected),
                   "b=20000 h=5 n=2500, 2e5 probes");
}

CheckResult check_reward_coefficient(const ValidationOptions& o) {
    // k ~ Poisson(lambda Delta) rival blocks, each holding the tx with
    // probability p; the fee is split evenly.
    const std::pair<double, double> grid[] = {{0.05, 0.1}, {0.3, 1.0}, {0.6, 3.0}, {1.0, 6.0}, {0.8, 10.0}};
    RandomStream rng(o.seed, 1, 2);
    double worst = 0.0;
    double worst_expected = 1.0;
    double worst_measured = 1.0;
    for (auto [p, a] : grid) {
        constexpr int trials = 200000;
        double total = 0.0;
        for (int t = 0; t < trials; ++t) {
            int holders = 0;
            for (double clock = rng.exponential(1.0); clock < a; clock += rng.exponential(1.0))
                holders += rng.uniform() < p;
            total += 1.0 / (holders + 1.0);
        }
        const double measured = total / trials;
        const double expected = reward_coefficient(p, 1.0, a);
        const double rel = std::abs(measured / expected - 1.0);
        if (rel >= worst) {
            worst = rel;
            worst_expected = expected;
            worst_measured = measured;
        }
    }
    return compare("reward_coefficient", worst_measured, worst_expected, Tol{o}(0.01 * worst_expected, worst_expected),
                   "worst of 5 grid points, 2e5 trials each");
}

CheckResult check_equilibrium(const ValidationOptions& o) {
    constexpr std::size_t m = 200;
    constexpr std::size_t n = 40;
    RandomStream rng(o.seed, 1, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f(m);
        for (double& x : f) x = rng.uniform_open();
        std::sort(f.begin(), f.end(), std::greater<>());
        const double lambda = 0.5;
        const double delay = 0.2 + 20.0 * rng.uniform();
        const auto eq = equilibrium_strategy(f, n, lambda, delay);
        const double own = expected_revenue(eq.strategy, eq.strategy, f, lambda, delay);
        const auto br = best_response(eq.strategy, f, n, lambda, delay);
        worst = std::max(worst, (br.revenue - own) / own);
    }
    return compare("equilibrium_certificate", worst, 0.0, Tol{o}(1e-6, 1e-6),
                   "max relative best-response gain over 20 fee vectors, m=200 n=40");
}

SimConfig desk_config(ProtocolKind protocol, std::uint64_t seed) {
    SimConfig c;
    c.protocol = protocol;
    c.num_miners = 10;
    c.n = 100;
    c.m = 500;
    c.lambda = 0.5;
    c.delta_mean = 10.0;
    c.tau_mean = 0.1;
    c.tx_rate = 80.0;
    c.horizon = 4000.0;
    c.seed = seed;
    return c;
}

std::vector<CheckResult> check_utilization(const ValidationOptions& o) {
    const SimConfig std_cfg = desk_config(ProtocolKind::kStandard, o.seed);
    const RunSummary s = summarize(run_simulation(std_cfg));
    const auto top = strategy_top_n(std::vector<double>(std_cfg.m, 1.0), std_cfg.n);
    const double u_std = utilization(top, std_cfg.n, std_cfg.lambda, std_cfg.delta_mean);
    SimConfig tips_cfg = desk_config(ProtocolKind::kTips, o.seed);
    tips_cfg.horizon = 1000.0;
    tips_cfg.tx_rate = 200.0;
    const RunSummary t = summarize(run_simulation(tips_cfg));
    return {compare("utilization_standard", s.utilization, u_std, Tol{o}(0.02, u_std),
                    "10 miners, n=100, m=500, lambda=0.5, Delta=10, top-n"),
            at_least("utilization_tips", t.utilization, 0.90, Tol{o}(0.0, 0.90), "same, TIPS with tau=0.1")};
}

std::vector<CheckResult> check_fsr(const ValidationOptions& o) {
    SimConfig c = desk_config(ProtocolKind::kTips, o.seed);
    c.horizon = 1000.0;
    c.tx_rate = 200.0;
    const RunSummary s = summarize(run_simulation(c));
    const double identity = s.block_rate * s.revenue_per_block;
    const double prop1 = c.lambda * s.predicted_revenue_per_block;
    return {compare("fsr_identity", s.fsr, identity, Tol{o}(1e-9 * identity, identity),
                    "coin/s against block rate times revenue per block"),
            compare("fsr_formula", s.fsr, prop1, Tol{o}(0.05 * prop1, prop1),
                    "(1/tau) sum f (1 - e^{-lambda tau p}) at each mined pool")};
}

std::vector<CheckResult> check_flood(const ValidationOptions& o) {
    constexpr std::uint32_t b = 16000;
    constexpr std::uint32_t h = 5;
    constexpr std::size_t n = 2000;
    const double eta = 1e-4;
    const FloodPolicy policy(b, h, n, eta);
    RandomStream rng(o.seed, 1, 4);

    std::size_t adversarial_rejected = 0;
    constexpr std::size_t adversarial = 2000;
    const auto target = static_cast<std::uint32_t>(std::ceil(policy.threshold()));
    for (std::size_t k = 0; k < adversarial; ++k) {
        BloomFilter f(b, h);
        while (f.popcount() < target) f.set_bit(static_cast<std::uint32_t>(rng.below(b)));
        adversarial_rejected += bf_validate(f, policy) == FilterVerdict::kReject;
    }

    constexpr std::size_t honest = 20000;
    std::size_t honest_rejected = 0;
    double seconds = 0.0;
    for (std::size_t k = 0; k < honest; ++k) {
        BloomFilter f(b, h);
        for (std::size_t i = 0; i < n; ++i) f.insert(BloomKey{rng.next_u64(), rng.next_u64()});
        const auto start = std::chrono::steady_clock::now();
        honest_rejected += bf_validate(f, policy) == FilterVerdict::kReject;
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    const double rate = static_cast<double>(honest_rejected) / honest;
    const double bound = eta + 3.0 * std::sqrt(eta * (1.0 - eta) / honest);
    const double allowed = Tol{o}(bound - eta, eta);
    const double micros = 1e6 * seconds / honest;
    return {compare("flood_adversarial_rejected", static_cast<double>(adversarial_rejected) / adversarial, 1.0,
                    Tol{o}(0.0, 1.0), "2000 filters at the popcount threshold"),
            CheckResult{"flood_honest_rejection", rate <= eta + allowed, rate, eta, allowed,
                        "2e4 filters with n=2000 inserts, at most eta + 3 sigma"},
            CheckResult{"flood_validate_time_us", micros <= 10.0, micros, 1.0, 9.0, "amortized per filter"}};
}

CheckResult check_delay_attack(const ValidationOptions& o) {
    const double alpha = 0.25;
    SimConfig c;
    c.num_miners = 2;
    c.lambda = 0.5;
    c.n = 5;
    c.m = 20000;
    c.fee_dist = FeeDistribution::kCustom;
    c.fee_values = {1.0};
    c.initial_pool = 12000;
    c.tx_rate = c.lambda * (1.0 - alpha) * static_cast<double>(c.n) - 0.45;
    c.tau_mean = 1e-3;
    c.delta_mean = 0.5;
    c.header_timeout = 2.0;
    c.horizon = 1e7;
    c.seed = o.seed;
    c = attach_delay_attacker(c, alpha, 2.0);
    c.delay->stop_after_episodes = 10000;
    const auto t = run_simulation(c);
    double total = 0.0;
    std::size_t done = 0;
    for (const auto& ep : t.episodes) {
        if (ep.included_time < 0.0) continue;
        total += ep.suppression();
        ++done;
    }
    const double expected = delay_attack_expectation(alpha, c.lambda, c.header_timeout);
    return compare("delay_attack", done ? total / static_cast<double>(done) : 0.0, expected,
                   Tol{o}(0.05 * expected, expected), "alpha=0.25 lambda=0.5 T=2, 1e4 episodes");
}

using CheckFn = std::vector<CheckResult> (*)(const ValidationOptions&);

struct Entry {
    const char* name;
    CheckFn run;
};

template <CheckResult (*F)(const ValidationOptions&)>
std::vector<CheckResult> one(const ValidationOptions& o) {
    return {F(o)};
}

constexpr Entry kChecks[] = {
    {"bloom_fpr", one<check_bloom_fpr>},
    {"reward_coefficient", one<check_reward_coefficient>},
    {"equilibrium", one<check_equilibrium>},
    {"utilization", check_utilization},
    {"fsr", check_fsr},
    {"flood", check_flood},
    {"delay_attack", one<check_delay_attack>},
};

} // namespace

std::vector<std::string> validation_check_names() {
    std::vector<std::string> out;
    for (const auto& e : kChecks) out.emplace_back(e.name);
    return out;
}

std::vector<CheckResult> run_validation(const ValidationOptions& options,
                                        const std::function<void(const CheckResult&)>& progress) {
    const auto names = validation_check_names();
    for (const auto& want : options.only)
        if (std::find(names.begin(), names.end(), want) == names.end())
            throw std::invalid_argument("unknown check '" + want + "'");
    std::vector<CheckResult> results;
    if (options.empty) return results;
    for (const auto& e : kChecks) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), e.name) == options.only.end())
            continue;
        for (auto& r : e.run(options)) {
            if (progress) progress(r);
            results.push_back(std::move(r));
        }
    }
    return results;
}

void print_check(std::ostream& out, const CheckResult& r) {
    char line[256];
    std::snprintf(line, sizeof line, "%s %-28s measured=%.9g expected=%.9g tol=%.3g", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.measured, r.expected, r.tolerance);
    out << line;
    if (!r.detail.empty()) out << "  (" << r.detail << ')';
    out << '\n';
}

} // namespace tips
