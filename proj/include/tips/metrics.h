// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include "tips/simengine.h"

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace tips {

struct MetricsOptions {
    /// Leading fraction of the run excluded from every estimator.
    double warmup_fraction = 0.1;
    /// Age a signal needs before a later inclusion of the same transaction
    /// counts as a post-signal duplicate. Negative: effective delay mean plus
    /// four standard deviations.
    double signal_lag = -1.0;
};

/// Thrown when an estimator has nothing to measure.
class EmptyTraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfirmationStats {
    /// Upper fee bounds of deciles 1..9; decile 10 is unbounded.
    std::array<double, 9> bounds{};
    /// Mean first-inclusion delay per ascending fee decile (NaN when empty).
    std::array<double, 10> mean{};
    std::array<std::size_t, 10> confirmed{};
    /// Arrived in the window but never mined before the end of the run.
    std::array<std::size_t, 10> censored{};
    std::vector<std::vector<double>> samples; // per decile
    double overall_mean = 0.0;
};

struct RunSummary {
    std::uint64_t seed = 0;
    ProtocolKind protocol = ProtocolKind::kTips;
    StrategyKind strategy = StrategyKind::kTopN;
    double lambda = 0.0;
    double delta_mean = 0.0;
    double tau_mean = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    double epsilon = 0.0;

    double window_start = 0.0;
    double window_end = 0.0;
    std::size_t blocks = 0;
    std::uint64_t inclusions = 0;
    std::uint64_t unique_inclusions = 0;
    double block_rate = 0.0;
    double mean_block_fill = 0.0;
    double utilization = 0.0;
    double tps = 0.0;
    double duplicate_rate = 0.0;
    double post_signal_duplicate_rate = 0.0;

    double total_revenue = 0.0;
    double revenue_per_block = 0.0;
    double fsr = 0.0;
    std::vector<double> revenue_per_miner; // mean coin per block of that miner
    double predicted_revenue_per_block = 0.0;

    ConfirmationStats confirmation;
};

RunSummary summarize(const EventTrace& trace, const MetricsOptions& options = {});

/// Unique over total inclusions in the measurement window. Throws
/// EmptyTraceError when nothing was included.
double measure_utilization(const EventTrace& trace, const MetricsOptions& options = {});
/// Unique inclusions per second of the window; 0 without blocks.
double measure_tps(const EventTrace& trace, const MetricsOptions& options = {});
/// Per-miner mean coin per block, each fee credited to the earliest-mined
/// block containing it.
std::vector<double> measure_revenue(const EventTrace& trace, const MetricsOptions& options = {});
ConfirmationStats measure_confirmation_time(const EventTrace& trace, const MetricsOptions& options = {});

/// One-way ANOVA p-value over non-empty groups (1 if fewer than two).
double anova_p_value(const std::vector<std::vector<double>>& groups);

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const RunSummary& summary);

} // namespace tips
