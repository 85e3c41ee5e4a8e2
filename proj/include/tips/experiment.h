// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include "tips/config.h"
#include "tips/metrics.h"
#include "tips/simengine.h"

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace tips {

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

/// A base configuration, a cartesian sweep over named fields, and a number of
/// seeded repeats per point.
///
/// File layout: simulation keys at top level or under [sim], an optional
/// [attacker] section, a [sweep] section whose keys are field names with
/// comma-separated values (or start:stop:step ranges), and a [run] section
/// with repeats, seed, warmup and output.
struct ExperimentSpec {
    SimConfig base;
    std::vector<SweepAxis> sweep; // first axis varies slowest
    std::size_t repeats = 1;
    std::uint64_t base_seed = 1;
    double warmup_fraction = 0.1;
    std::string output; // empty: standard output
    std::string hash;   // SHA-256 of the source text, hex

    std::size_t num_points() const;
    /// Field assignments of point `index`, in axis order.
    std::vector<std::pair<std::string, std::string>> point(std::size_t index) const;
    /// Resolved configuration of one run; the seed is
    /// base_seed + point * 10007 + repeat.
    SimConfig run_config(std::size_t point, std::size_t repeat) const;
};

ExperimentSpec parse_experiment(const std::string& text, const std::string& source);
ExperimentSpec load_experiment(const std::string& path);

/// Expands "a, b, c" or "start:stop:step" (inclusive).
std::vector<std::string> expand_values(const std::string& value);

std::string sha256_hex(const std::string& data);

/// Worker count: TIPS_SIM_THREADS if set, else hardware concurrency, never
/// more than `jobs`.
std::size_t worker_count(std::size_t jobs);

/// Runs every (point, repeat) pair; results are in point-major order whatever
/// the completion order.
std::vector<RunSummary> run_experiment(const ExperimentSpec& spec, std::size_t threads = 0);

/// Writes "# spec-hash: <hex>", the RunSummary header and one row per run.
void write_experiment_csv(std::ostream& out, const ExperimentSpec& spec, const std::vector<RunSummary>& rows);

} // namespace tips
