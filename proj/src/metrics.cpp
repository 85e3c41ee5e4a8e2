// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/metrics.h"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace tips {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();
constexpr std::size_t kNoBlock = static_cast<std::size_t>(-1);

struct Window {
    double start;
    double end;
    double length() const { return end - start; }
    bool contains(double t) const { return t >= start && t <= end; }
};

Window window_of(const EventTrace& trace, const MetricsOptions& options) {
    if (!(options.warmup_fraction >= 0.0 && options.warmup_fraction < 1.0))
        throw std::invalid_argument("warmup_fraction must be in [0, 1)");
    return Window{options.warmup_fraction * trace.end_time, trace.end_time};
}

// Earliest honest block (and its mine time) per transaction serial.
struct FirstInclusion {
    std::vector<double> time;
    std::vector<std::size_t> block;
};

FirstInclusion first_inclusions(const EventTrace& trace) {
    FirstInclusion first{std::vector<double>(trace.txs.size(), kNever),
                         std::vector<std::size_t>(trace.txs.size(), kNoBlock)};
    for (std::size_t b = 0; b < trace.blocks.size(); ++b) {
        const BlockRecord& rec = trace.blocks[b];
        if (rec.flags != kBlockHonest) continue;
        for (std::uint64_t s : rec.tx_serials) {
            if (rec.mine_time < first.time[s]) {
                first.time[s] = rec.mine_time;
                first.block[s] = b;
            }
        }
    }
    return first;
}

double default_lag(const SimConfig& c) {
    if (c.protocol == ProtocolKind::kTips) return c.tau_mean + 4.0 * c.tau_stddev;
    return c.delta_mean + 4.0 * c.delta_stddev;
}

ConfirmationStats confirmation_stats(const EventTrace& trace, const FirstInclusion& first, const Window& w) {
    ConfirmationStats out;
    std::vector<std::size_t> window_txs;
    for (std::size_t s = 0; s < trace.txs.size(); ++s)
        if (!trace.txs[s].target && w.contains(trace.txs[s].arrival)) window_txs.push_back(s);

    if (trace.config.fee_dist == FeeDistribution::kUniform) {
        for (std::size_t k = 0; k < 9; ++k) out.bounds[k] = static_cast<double>(k + 1) / 10.0;
    } else {
        // Quantiles of the configured fee levels, which are drawn uniformly.
        std::vector<double> levels = trace.config.fee_values;
        std::sort(levels.begin(), levels.end());
        for (std::size_t k = 0; k < 9; ++k)
            out.bounds[k] = levels[std::min(levels.size() - 1, (k + 1) * levels.size() / 10)];
    }

    out.samples.assign(10, {});
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t s : window_txs) {
        const double fee = trace.txs[s].fee;
        const auto bucket =
            static_cast<std::size_t>(std::upper_bound(out.bounds.begin(), out.bounds.end(), fee) - out.bounds.begin());
        if (first.time[s] <= w.end) {
            const double delay = first.time[s] - trace.txs[s].arrival;
            out.samples[bucket].push_back(delay);
            ++out.confirmed[bucket];
            total += delay;
            ++count;
        } else {
            ++out.censored[bucket];
        }
    }
    for (std::size_t k = 0; k < 10; ++k) {
        double sum = 0.0;
        for (double d : out.samples[k]) sum += d;
        out.mean[k] = out.samples[k].empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : sum / static_cast<double>(out.samples[k].size());
    }
    out.overall_mean = count ? total / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

} // namespace

RunSummary summarize(const EventTrace& trace, const MetricsOptions& options) {
    const SimConfig& c = trace.config;
    const Window w = window_of(trace, options);
    const FirstInclusion first = first_inclusions(trace);
    const double lag = options.signal_lag >= 0.0 ? options.signal_lag : default_lag(c);

    RunSummary s;
    s.seed = c.seed;
    s.protocol = c.protocol;
    s.strategy = c.strategy;
    s.lambda = c.lambda;
    s.delta_mean = c.delta_mean;
    s.tau_mean = c.tau_mean;
    s.n = c.n;
    s.m = c.m;
    s.epsilon = c.epsilon;
    s.window_start = w.start;
    s.window_end = w.end;
    s.revenue_per_miner.assign(c.num_miners, 0.0);

    std::vector<std::size_t> miner_blocks(c.num_miners, 0);
    std::uint64_t post_signal = 0;
    double predicted = 0.0;
    for (std::size_t b = 0; b < trace.blocks.size(); ++b) {
        const BlockRecord& rec = trace.blocks[b];
        if (rec.flags != kBlockHonest || !w.contains(rec.mine_time)) continue;
        ++s.blocks;
        ++miner_blocks[rec.miner];
        predicted += rec.predicted_revenue;
        for (std::uint64_t serial : rec.tx_serials) {
            ++s.inclusions;
            if (first.block[serial] == b) {
                ++s.unique_inclusions;
                s.total_revenue += trace.txs[serial].fee;
                s.revenue_per_miner[rec.miner] += trace.txs[serial].fee;
            } else if (first.time[serial] <= rec.mine_time - lag) {
                ++post_signal;
            }
        }
    }
    for (std::size_t i = 0; i < c.num_miners; ++i)
        if (miner_blocks[i]) s.revenue_per_miner[i] /= static_cast<double>(miner_blocks[i]);

    const double length = w.length();
    s.block_rate = length > 0.0 ? static_cast<double>(s.blocks) / length : 0.0;
    s.tps = length > 0.0 ? static_cast<double>(s.unique_inclusions) / length : 0.0;
    s.fsr = length > 0.0 ? s.total_revenue / length : 0.0;
    if (s.blocks) {
        s.mean_block_fill = static_cast<double>(s.inclusions) / static_cast<double>(s.blocks);
        s.revenue_per_block = s.total_revenue / static_cast<double>(s.blocks);
        s.predicted_revenue_per_block = predicted / static_cast<double>(s.blocks);
    }
    if (s.inclusions) {
        const double total = static_cast<double>(s.inclusions);
        s.utilization = static_cast<double>(s.unique_inclusions) / total;
        s.duplicate_rate = 1.0 - s.utilization;
        s.post_signal_duplicate_rate = static_cast<double>(post_signal) / total;
    }
    s.confirmation = confirmation_stats(trace, first, w);
    return s;
}

double measure_utilization(const EventTrace& trace, const MetricsOptions& options) {
    const RunSummary s = summarize(trace, options);
    if (s.inclusions == 0) throw EmptyTraceError("no transactions were included in the measurement window");
    return s.utilization;
}

double measure_tps(const EventTrace& trace, const MetricsOptions& options) {
    return summarize(trace, options).tps;
}

std::vector<double> measure_revenue(const EventTrace& trace, const MetricsOptions& options) {
    return summarize(trace, options).revenue_per_miner;
}

ConfirmationStats measure_confirmation_time(const EventTrace& trace, const MetricsOptions& options) {
    return confirmation_stats(trace, first_inclusions(trace), window_of(trace, options));
}

double anova_p_value(const std::vector<std::vector<double>>& groups) {
    std::size_t k = 0;
    std::size_t total = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        ++k;
        total += g.size();
        for (double x : g) grand += x;
    }
    if (k < 2 || total <= k) return 1.0;
    grand /= static_cast<double>(total);
    double between = 0.0;
    double within = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        double mean = 0.0;
        for (double x : g) mean += x;
        mean /= static_cast<double>(g.size());
        between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
        for (double x : g) within += (x - mean) * (x - mean);
    }
    const double df1 = static_cast<double>(k - 1);
    const double df2 = static_cast<double>(total - k);
    if (within <= 0.0) return between > 0.0 ? 0.0 : 1.0;
    const double f = (between / df1) / (within / df2);
    return boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), f));
}

void write_summary_header(std::ostream& out) {
    out << "seed,protocol,strategy,lambda,delta_mean,tau_mean,n,m,epsilon,utilization,tps,revenue,fsr,dup_rate";
    for (int k = 1; k <= 10; ++k) out << ",ct_d" << k;
    out << '\n';
}

void write_summary_row(std::ostream& out, const RunSummary& s) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        out << ',' << buf;
    };
    out << s.seed << ',' << to_string(s.protocol) << ',' << to_string(s.strategy);
    num(s.lambda);
    num(s.delta_mean);
    num(s.tau_mean);
    out << ',' << s.n << ',' << s.m;
    num(s.epsilon);
    num(s.utilization);
    num(s.tps);
    num(s.revenue_per_block);
    num(s.fsr);
    num(s.duplicate_rate);
    for (double v : s.confirmation.mean) num(v);
    out << '\n';
}

} // namespace tips
