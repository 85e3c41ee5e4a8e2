// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/rng.h"

#include <cmath>
#include <numbers>

namespace tips {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t entity, std::uint64_t purpose) noexcept
    : key_(mix64(mix64(master_seed ^ 0x5449505321ULL) + mix64(entity * 0xd1b54a32d192ed03ULL + purpose))) {}

std::uint64_t RandomStream::next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double RandomStream::exponential(double rate) noexcept {
    return -std::log(uniform_open()) / rate;
}

double RandomStream::normal(double mean, double stddev) noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return mean + stddev * cached_normal_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return mean + stddev * radius * std::cos(angle);
}

std::uint64_t RandomStream::below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift; the bias is below 2^-64 * bound, irrelevant here.
    __extension__ using u128 = unsigned __int128;
    const u128 product = static_cast<u128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(product >> 64);
}

} // namespace tips
