// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace tips {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ValidationOptions {
    /// When positive, replaces every tolerance by this fraction of the
    /// expected value.
    double relative_tolerance = 0.0;
    std::vector<std::string> only; // empty: every check
    bool empty = false;            // run no checks
    std::uint64_t seed = 1;
};

/// Names of the formula-versus-simulation checks, in run order.
std::vector<std::string> validation_check_names();

/// Runs the selected checks; `progress` is called after each one. Throws
/// std::invalid_argument for an unknown check name.
std::vector<CheckResult> run_validation(const ValidationOptions& options,
                                        const std::function<void(const CheckResult&)>& progress = {});

void print_check(std::ostream& out, const CheckResult& result);

} // namespace tips
