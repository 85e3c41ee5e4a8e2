// End-to-end acceptance suite. Every criterion prints one PASS/FAIL line;
// details follow on indented lines. Reference values are computed here from
// the closed forms, independently of the library.

#include "tips/analytics.h"
#include "tips/bloom.h"
#include "tips/metrics.h"
#include "tips/simengine.h"
#include "tips/strategies.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace tips;

namespace {

using Clock = std::chrono::steady_clock;

struct Report {
    bool pass = true;
    std::vector<std::string> lines;

    void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
    void note(const char* fmt, ...) __attribute__((format(printf, 2, 3)));
};

void Report::check(bool ok, const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + buf);
}

void Report::note(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    lines.push_back(std::string("info ") + buf);
}

// ---- independent oracles ------------------------------------------------

double oracle_fpr(double b, double h, double n) { return std::pow(1.0 - std::exp(-h * n / b), h); }

double oracle_phi(double x) { return x < 1e-12 ? 1.0 - x / 2.0 : -std::expm1(-x) / x; }

// phi is strictly decreasing from 1 at 0; bisection on [0, hi].
double oracle_phi_inverse(double y) {
    double lo = 0.0;
    double hi = 1.0;
    while (oracle_phi(hi) > y) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oracle_phi(mid) > y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double oracle_r(double p, double lambda, double delay) { return oracle_phi(lambda * delay * p); }

// Per-block revenue R(p | q) = sum p_i f_i r(q_i).
double oracle_revenue(const std::vector<double>& p, const std::vector<double>& q, const std::vector<double>& f,
                      double lambda, double delay) {
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) total += p[i] * f[i] * oracle_r(q[i], lambda, delay);
    return total;
}

// Best response to q: R is linear in p with sum p = n and p in [0,1], so the
// optimum puts mass 1 on the n largest f_i r(q_i).
double oracle_best_response(const std::vector<double>& q, const std::vector<double>& f, std::size_t n, double lambda,
                            double delay) {
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i] * oracle_r(q[i], lambda, delay);
    std::sort(v.begin(), v.end(), std::greater<>());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += v[i];
    return total;
}

// Deviation-gain bound of the random strategy.
double oracle_xi(const std::vector<double>& f, std::size_t n, double lambda, double delay) {
    const double m = static_cast<double>(f.size());
    double top = 0.0;
    double all = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        all += f[i];
        if (i < n) top += f[i];
    }
    return static_cast<double>(n) * oracle_phi(lambda * delay * static_cast<double>(n) / m) *
           (top / static_cast<double>(n) - all / m);
}

double oracle_delay_attack(double alpha, double lambda, double t) { return std::expm1(alpha * lambda * t) / lambda; }

std::vector<double> sorted_fees(std::mt19937_64& gen, std::size_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f(m);
    for (double& x : f) x = 1.0 - u(gen); // (0, 1]
    std::sort(f.begin(), f.end(), std::greater<>());
    return f;
}

TxId random_tx(std::mt19937_64& gen) {
    TxId id{};
    for (int w = 0; w < 4; ++w) {
        const std::uint64_t v = gen();
        for (int i = 0; i < 8; ++i) id[8 * w + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    return id;
}

double rel(double measured, double expected) { return std::abs(measured / expected - 1.0); }

SimConfig desk(ProtocolKind protocol, StrategyKind strategy, double lambda, std::uint64_t seed) {
    SimConfig c;
    c.protocol = protocol;
    c.strategy = strategy;
    c.num_miners = 10;
    c.n = 200;
    c.m = 1000;
    c.lambda = lambda;
    c.delta_mean = 10.0;
    c.tau_mean = 0.1;
    c.tx_rate = 300.0;
    c.horizon = 1000.0;
    c.seed = seed;
    return c;
}

RunSummary simulate(const SimConfig& c) { return summarize(run_simulation(c)); }

const double kLambdas[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

// ---- criteria ------------------------------------------------------------

void bloom_fpr(Report& r) {
    constexpr std::uint32_t b = 20000;
    constexpr std::uint32_t h = 5;
    constexpr std::size_t n = 2500;
    constexpr std::size_t probes = 1000000;
    std::mt19937_64 gen(101);
    BloomFilter filter(b, h);
    for (std::size_t i = 0; i < n; ++i) filter.insert(random_tx(gen));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probes; ++i) hits += filter.contains(random_tx(gen));
    const double fpr = static_cast<double>(hits) / probes;
    r.check(std::abs(fpr - 0.0217) <= 0.003, "empirical FPR %.5f, target 0.0217 +- 0.003 (closed form %.5f)", fpr,
            oracle_fpr(b, h, n));
}

void reward_coefficient_mc(Report& r) {
    // A block's rivals: k ~ Poisson(lambda Delta) blocks in its propagation
    // window, each holding the tx with probability p; the fee splits evenly.
    const double ps[] = {0.05, 0.25, 0.5, 0.75, 1.0};
    const double loads[] = {0.1, 1.0, 3.0, 10.0};
    constexpr int trials = 400000;
    std::mt19937_64 gen(202);
    double worst = 0.0;
    for (double p : ps) {
        for (double a : loads) {
            std::poisson_distribution<int> rivals(a);
            double total = 0.0;
            for (int t = 0; t < trials; ++t) {
                const int k = rivals(gen);
                const int holders = k == 0 ? 0 : std::binomial_distribution<int>(k, p)(gen);
                total += 1.0 / (holders + 1.0);
            }
            const double mc = total / trials;
            const double lib = reward_coefficient(p, 1.0, a);
            const double err = rel(mc, lib);
            worst = std::max(worst, err);
            if (err > 0.01) r.check(false, "p=%.2f lambda*Delta=%.1f: MC %.5f vs r=%.5f", p, a, mc, lib);
        }
    }
    r.check(worst <= 0.01, "20 grid points, 4e5 trials each: worst relative error %.4f%% (limit 1%%)", 100.0 * worst);
}

void utilization_tps(Report& r) {
    SimConfig std_cfg;
    std_cfg.protocol = ProtocolKind::kStandard;
    std_cfg.num_miners = 10;
    std_cfg.n = 2000;
    std_cfg.m = 10000;
    std_cfg.lambda = 0.5;
    std_cfg.delta_mean = 10.0;
    std_cfg.tau_mean = 0.1;
    std_cfg.tx_rate = 400.0;
    std_cfg.horizon = 2400.0;
    std_cfg.seed = 303;
    const RunSummary s = simulate(std_cfg);
    const double u_ref = 1.0 / (std_cfg.lambda * std_cfg.delta_mean + 1.0);
    const double tps_ref = std_cfg.lambda * static_cast<double>(std_cfg.n) * u_ref;
    r.check(std::abs(s.utilization - u_ref) <= 0.02, "standard top-n utilization %.4f, closed form %.4f +- 0.02",
            s.utilization, u_ref);
    r.check(std::abs(s.tps - tps_ref) <= 20.0, "standard top-n TPS %.1f, closed form %.1f +- 20", s.tps, tps_ref);

    SimConfig tips_cfg = std_cfg;
    tips_cfg.protocol = ProtocolKind::kTips;
    tips_cfg.tx_rate = 2000.0;
    tips_cfg.horizon = 1000.0;
    const RunSummary t = simulate(tips_cfg);
    r.check(t.utilization >= 0.90, "TIPS top-n utilization %.4f >= 0.90", t.utilization);
    r.check(t.tps >= 850.0, "TIPS top-n TPS %.1f >= 850", t.tps);

    bool all_u = true;
    bool all_tps = true;
    for (double lambda : kLambdas) {
        const auto seed = static_cast<std::uint64_t>(3000 + std::lround(10 * lambda));
        const RunSummary a = simulate(desk(ProtocolKind::kTips, StrategyKind::kTopN, lambda, seed));
        const RunSummary b = simulate(desk(ProtocolKind::kStandard, StrategyKind::kTopN, lambda, seed));
        all_u = all_u && a.utilization > b.utilization;
        all_tps = all_tps && a.tps > b.tps;
        r.note("lambda=%.1f: U tips %.3f std %.3f, TPS tips %.1f std %.1f", lambda, a.utilization, b.utilization,
               a.tps, b.tps);
    }
    r.check(all_u && all_tps, "paired seeds, lambda 0.1..1.0 (n=200, m=1000): TIPS above standard in U and TPS");
}

void equilibrium_certificate(Report& r) {
    constexpr std::size_t m = 200;
    constexpr std::size_t n = 40;
    const double lambda = 0.5;
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> log_delay(std::log(0.2), std::log(20.0));
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = sorted_fees(gen, m);
        const double delay = std::exp(log_delay(gen));
        const auto p = equilibrium_strategy(f, n, lambda, delay).strategy;
        double mass = 0.0;
        for (double x : p) mass += x;
        if (std::abs(mass - static_cast<double>(n)) > 1e-9) r.check(false, "trial %d: sum p = %.12f", trial, mass);
        const double own = oracle_revenue(p, p, f, lambda, delay);
        const double best = oracle_best_response(p, f, n, lambda, delay);
        worst = std::max(worst, (best - own) / own);
    }
    r.check(worst <= 1e-6, "50 fee vectors (m=200, n=40): max relative best-response gain %.3g <= 1e-6", worst);

    double spread = 0.0;
    for (double fee : {1.0, 0.37}) {
        for (double delay : {0.1, 10.0, 1e4}) {
            const std::vector<double> f(m, fee);
            for (double x : equilibrium_strategy(f, n, lambda, delay).strategy)
                spread = std::max(spread, std::abs(x - static_cast<double>(n) / m));
        }
    }
    r.check(spread <= 1e-9, "homogeneous fees: max |p_i - n/m| = %.3g <= 1e-9", spread);
}

void dilemma_limits(Report& r) {
    constexpr std::size_t m = 200;
    constexpr std::size_t n = 40;
    const double lambda = 0.5;
    std::mt19937_64 gen(505);

    const double delay = 1e4;
    bool bound = true;
    bool ordered = true;
    bool close = true;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = sorted_fees(gen, m);
        const std::vector<double> rand(m, static_cast<double>(n) / m);
        const auto p = equilibrium_strategy(f, n, lambda, delay).strategy;
        const double xi = oracle_xi(f, n, lambda, delay);
        const double own_rand = oracle_revenue(rand, rand, f, lambda, delay);
        const double own_eq = oracle_revenue(p, p, f, lambda, delay);
        const double gain_rand = oracle_best_response(rand, f, n, lambda, delay) - own_rand;
        const double gain_eq = oracle_best_response(p, f, n, lambda, delay) - own_eq;
        bound = bound && gain_rand <= xi * (1.0 + 1e-9);
        ordered = ordered && gain_eq <= gain_rand + 1e-9 * xi;
        close = close && std::abs(own_eq - own_rand) <= xi;
        worst_ratio = std::max(worst_ratio, std::abs(own_eq - own_rand) / xi);
    }
    r.check(bound, "Delta=1e4: random strategy's deviation gain <= xi on 20 fee vectors");
    r.check(ordered, "Delta=1e4: solver's deviation gain <= random's");
    r.check(close, "Delta=1e4: |R(p*) - R(random)| <= xi (worst %.3g xi)", worst_ratio);

    bool exact = true;
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = sorted_fees(gen, m);
        const double tau_max = oracle_phi_inverse(f[n] / f[n - 1]) / lambda;
        for (double scale : {0.999, 0.5, 0.01}) {
            const auto p = equilibrium_strategy(f, n, lambda, scale * tau_max).strategy;
            for (std::size_t i = 0; i < m; ++i) exact = exact && p[i] == (i < n ? 1.0 : 0.0);
        }
    }
    r.check(exact, "tau below the top-n uniqueness threshold: solver returns exactly top-n (20 vectors x 3 taus)");
}

void revenue(Report& r) {
    bool ordered = true;
    double tips_ratio = 0.0;
    double std_ratio = 0.0;
    for (double lambda : kLambdas) {
        const auto seed = static_cast<std::uint64_t>(6000 + std::lround(10 * lambda));
        const RunSummary a = simulate(desk(ProtocolKind::kTips, StrategyKind::kEquilibrium, lambda, seed));
        const RunSummary b = simulate(desk(ProtocolKind::kStandard, StrategyKind::kEquilibrium, lambda, seed));
        ordered = ordered && a.revenue_per_block > b.revenue_per_block;
        r.note("lambda=%.1f: revenue/block tips %.2f (expected %.2f), std %.2f (expected %.2f)", lambda,
               a.revenue_per_block, a.predicted_revenue_per_block, b.revenue_per_block, b.predicted_revenue_per_block);
        if (lambda == 0.5) {
            tips_ratio = a.revenue_per_block / a.predicted_revenue_per_block;
            std_ratio = b.revenue_per_block / b.predicted_revenue_per_block;
        }
    }
    r.check(ordered, "paired seeds, lambda 0.1..1.0: TIPS equilibrium revenue above standard");
    r.check(std::abs(tips_ratio - 1.0) <= 0.05, "lambda=0.5 TIPS: measured/expected R(p*) = %.4f (within 5%%)",
            tips_ratio);
    r.check(std::abs(std_ratio - 1.0) <= 0.05, "lambda=0.5 standard: measured/expected R(p*) = %.4f (within 5%%)",
            std_ratio);
}

void fsr(Report& r) {
    for (auto protocol : {ProtocolKind::kTips, ProtocolKind::kStandard}) {
        const RunSummary s = simulate(desk(protocol, StrategyKind::kTopN, 0.5, 707));
        const double identity = s.block_rate * s.revenue_per_block;
        r.check(std::abs(s.fsr - identity) <= 1e-12 * identity,
                "%s: FSR %.9g coin/s = block rate x revenue/block %.9g", to_string(protocol), s.fsr, identity);
        // lambda R(p) equals the fee-service-rate sum f (1 - e^{-lambda d p}) / d.
        const double prop1 = s.lambda * s.predicted_revenue_per_block;
        r.check(rel(s.fsr, prop1) <= 0.05, "%s: FSR closed form %.4f vs measured %.4f (within 5%%)", to_string(protocol),
                prop1, s.fsr);
    }
}

double variance_of_mean(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size());
}

void confirmation_ordering(Report& r) {
    SimConfig c = desk(ProtocolKind::kTips, StrategyKind::kTopN, 0.5, 808);
    c.tx_rate = 80.0;
    c.horizon = 3000.0;
    const RunSummary tips_run = simulate(c);
    c.protocol = ProtocolKind::kStandard;
    const RunSummary std_run = simulate(c);

    const auto& ct = tips_run.confirmation;
    bool monotone = true;
    std::string means;
    for (std::size_t k = 0; k < 10; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.2f", ct.mean[k]);
        means += buf;
        if (k == 0) continue;
        const double se = std::sqrt(variance_of_mean(ct.samples[k]) + variance_of_mean(ct.samples[k - 1]));
        monotone = monotone && !std::isnan(ct.mean[k]) && ct.mean[k] <= ct.mean[k - 1] + 3.0 * se;
    }
    r.note("TIPS top-n decile means (s):%s", means.c_str());
    r.check(monotone, "TIPS top-n mean confirmation time non-increasing over ascending fee deciles (3 SE ties)");
    r.check(ct.overall_mean < std_run.confirmation.overall_mean, "paired seed: TIPS mean %.3f s < standard %.3f s",
            ct.overall_mean, std_run.confirmation.overall_mean);
}

void flood_defense(Report& r) {
    constexpr std::uint32_t b = 16000;
    constexpr std::uint32_t h = 5;
    constexpr std::size_t n = 2000;
    const double eta = 1e-4;
    const FloodPolicy policy(b, h, n, eta);
    std::mt19937_64 gen(909);

    // Popcount threshold, recomputed here.
    const double expected_ones = b - b * std::pow(1.0 - 1.0 / b, static_cast<double>(h * n));
    const double threshold = expected_ones + std::sqrt(-0.5 * h * n * std::log(eta));
    r.note("popcount threshold %.2f (library %.2f)", threshold, policy.threshold());

    constexpr std::size_t adversarial = 2000;
    std::size_t rejected = 0;
    std::uniform_int_distribution<std::uint32_t> bit(0, b - 1);
    std::uniform_int_distribution<std::uint32_t> extra(0, b / 4);
    for (std::size_t k = 0; k < adversarial; ++k) {
        BloomFilter f(b, h);
        const auto target = std::min<std::uint32_t>(b, static_cast<std::uint32_t>(std::ceil(threshold)) + extra(gen));
        while (f.popcount() < target) f.set_bit(bit(gen));
        rejected += bf_validate(f, policy) == FilterVerdict::kReject;
    }
    r.check(rejected == adversarial, "adversarial over-threshold filters rejected: %zu / %zu", rejected, adversarial);

    constexpr std::size_t honest = 20000;
    std::vector<BloomFilter> filters;
    filters.reserve(1000);
    std::size_t honest_rejected = 0;
    double seconds = 0.0;
    for (std::size_t batch = 0; batch < honest / 1000; ++batch) {
        filters.clear();
        for (std::size_t k = 0; k < 1000; ++k) {
            BloomFilter f(b, h);
            for (std::size_t i = 0; i < n; ++i) f.insert(random_tx(gen));
            filters.push_back(std::move(f));
        }
        const auto start = Clock::now();
        for (const auto& f : filters) honest_rejected += bf_validate(f, policy) == FilterVerdict::kReject;
        seconds += std::chrono::duration<double>(Clock::now() - start).count();
    }
    const double rate = static_cast<double>(honest_rejected) / honest;
    const double limit = eta + 3.0 * std::sqrt(eta * (1.0 - eta) / honest);
    r.check(rate <= limit, "honest rejection %.2e <= eta + 3 sigma = %.2e", rate, limit);
    const double micros = 1e6 * seconds / honest;
    r.check(micros <= 10.0, "validation %.3f us per filter amortized (limit 10 us)", micros);
}

void delay_attack(Report& r) {
    for (double alpha : {0.1, 0.25, 0.4}) {
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
        c.seed = 1000 + static_cast<std::uint64_t>(100 * alpha);
        c = attach_delay_attacker(c, alpha, 2.0);
        c.delay->stop_after_episodes = 10000;
        const EventTrace t = run_simulation(c);
        double total = 0.0;
        std::size_t done = 0;
        std::size_t evicted = 0;
        for (const auto& ep : t.episodes) {
            if (ep.evicted) ++evicted;
            if (ep.included_time < 0.0) continue;
            total += ep.suppression();
            ++done;
        }
        const double measured = done ? total / static_cast<double>(done) : 0.0;
        const double expected = oracle_delay_attack(alpha, c.lambda, c.header_timeout);
        r.check(done >= 10000 && rel(measured, expected) <= 0.05,
                "alpha=%.2f: mean added delay %.4f s vs (1/lambda)(e^{alpha lambda T}-1) = %.4f s over %zu episodes "
                "(%zu evicted)",
                alpha, measured, expected, done, evicted);
    }
}

void not_reproducible(Report& r) {
    r.note("throughput-limit ratio depends on the transaction size: 500 B gives %.6g, 500 KB gives %.6g",
           limit_tps_ratio(4000.0, 8.0), limit_tps_ratio(4.0e6, 8.0));
    r.note("the 5e5 ratio and absolute plot values are not reproduced at desk scale;");
    r.note("criteria 3-8 replace them with formula-anchored checks");
    r.check(limit_tps_ratio(4000.0, 8.0) == 500.0 && limit_tps_ratio(4.0e6, 8.0) == 5.0e5,
            "stated as non-reproducible; the ratio formula itself evaluates exactly (500 and 5e5)");
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds; // 0: none stated
    std::function<void(Report&)> run;
};

} // namespace

int main(int argc, char** argv) {
    const Criterion criteria[] = {
        {1, "bloom false-positive rate", 10, bloom_fpr},
        {2, "reward coefficient Monte-Carlo", 60, reward_coefficient_mc},
        {3, "utilization and TPS", 600, utilization_tps},
        {4, "equilibrium certificate", 60, equilibrium_certificate},
        {5, "dilemma limits", 60, dilemma_limits},
        {6, "revenue", 600, revenue},
        {7, "FSR identity", 0, fsr},
        {8, "confirmation ordering", 0, confirmation_ordering},
        {9, "flood defense", 0, flood_defense},
        {10, "delay attack", 300, delay_attack},
        {11, "desk-scale non-reproducible items", 0, not_reproducible},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Report report;
        const auto start = Clock::now();
        try {
            c.run(report);
        } catch (const std::exception& e) {
            report.check(false, "exception: %s", e.what());
        }
        const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
        if (c.budget_seconds > 0.0)
            report.check(elapsed <= c.budget_seconds, "runtime %.1f s (limit %.0f s)", elapsed, c.budget_seconds);
        std::printf("%s criterion %2d: %s (%.1f s)\n", report.pass ? "PASS" : "FAIL", c.id, c.name, elapsed);
        for (const auto& line : report.lines) std::printf("      %s\n", line.c_str());
        std::fflush(stdout);
        failed += !report.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
