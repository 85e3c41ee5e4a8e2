// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>
#include <limits>

namespace tips {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream keyed by (master seed, entity, purpose).
///
/// Output k is mix64(key + k * golden), so two streams never share state and
/// a stream's draws do not depend on how many draws other streams made.
/// The distributions below are implemented here rather than through
/// <random> so that traces are bit-identical across standard libraries.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t master_seed, std::uint64_t entity, std::uint64_t purpose) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 bits of precision.
    double uniform() noexcept;
    /// Uniform on (0, 1).
    double uniform_open() noexcept;
    double exponential(double rate) noexcept;
    /// Box-Muller; the second variate of each pair is cached.
    double normal(double mean, double stddev) noexcept;
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

// Stream purposes. Entities are miner indices; the constants below name the
// remaining actors.
namespace stream {
inline constexpr std::uint64_t kEntityWorld = 0xffff0001ULL;
inline constexpr std::uint64_t kEntityFloodAttacker = 0xffff0002ULL;
inline constexpr std::uint64_t kEntityDelayAttacker = 0xffff0003ULL;

inline constexpr std::uint64_t kMining = 1;
inline constexpr std::uint64_t kDelay = 2;
inline constexpr std::uint64_t kSampling = 3;
inline constexpr std::uint64_t kTxArrival = 4;
inline constexpr std::uint64_t kTxFee = 5;
inline constexpr std::uint64_t kTxId = 6;
inline constexpr std::uint64_t kSignal = 7;
} // namespace stream

} // namespace tips
