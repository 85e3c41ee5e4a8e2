// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/bloom.h"

#include <sodium/crypto_shorthash_siphash24.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace tips {

namespace {

// Fixed SipHash key; part of the signal format, never change it.
constexpr unsigned char kSignalKey[crypto_shorthash_siphashx24_KEYBYTES] = {
    'T', 'I', 'P', 'S', '-', 's', 'i', 'g', 'n', 'a', 'l', '-', 'k', 'e', 'y', '1'};

constexpr std::uint8_t kWireVersion = 1;
constexpr std::size_t kWireHeaderSize = 4 + 1 + 4 + 1 + 2;

std::uint64_t load_le64(const unsigned char* p) noexcept {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

} // namespace

BloomKey bloom_key(const TxId& id) noexcept {
    unsigned char out[crypto_shorthash_siphashx24_BYTES];
    crypto_shorthash_siphashx24(out, id.data(), id.size(), kSignalKey);
    return BloomKey{load_le64(out), load_le64(out + 8)};
}

// ---------------------------------------------------------------------------
// BloomFilter
// ---------------------------------------------------------------------------

BloomFilter::BloomFilter(std::uint32_t bits, std::uint32_t num_hashes)
    : bits_(bits), num_hashes_(num_hashes) {
    if (bits == 0) throw std::invalid_argument("bloom filter needs at least one bit");
    if (num_hashes == 0) throw std::invalid_argument("bloom filter needs at least one hash function");
    words_.assign((static_cast<std::size_t>(bits) + 63) / 64, 0);
}

void BloomFilter::insert(const BloomKey& key) noexcept {
    const std::uint64_t b = bits_;
    const std::uint64_t step = b > 1 ? 1 + key.h2 % (b - 1) : 0;
    std::uint64_t pos = key.h1 % b;
    for (std::uint32_t i = 0; i < num_hashes_; ++i) {
        words_[pos >> 6] |= std::uint64_t{1} << (pos & 63);
        pos += step;
        if (pos >= b) pos -= b;
    }
    ++inserted_;
}

bool BloomFilter::contains(const BloomKey& key) const noexcept {
    const std::uint64_t b = bits_;
    const std::uint64_t step = b > 1 ? 1 + key.h2 % (b - 1) : 0;
    std::uint64_t pos = key.h1 % b;
    for (std::uint32_t i = 0; i < num_hashes_; ++i) {
        if ((words_[pos >> 6] & (std::uint64_t{1} << (pos & 63))) == 0) return false;
        pos += step;
        if (pos >= b) pos -= b;
    }
    return true;
}

std::vector<std::uint32_t> BloomFilter::positions(const BloomKey& key) const {
    const std::uint64_t b = bits_;
    const std::uint64_t step = b > 1 ? 1 + key.h2 % (b - 1) : 0;
    std::uint64_t pos = key.h1 % b;
    std::vector<std::uint32_t> out;
    out.reserve(num_hashes_);
    for (std::uint32_t i = 0; i < num_hashes_; ++i) {
        out.push_back(static_cast<std::uint32_t>(pos));
        pos += step;
        if (pos >= b) pos -= b;
    }
    return out;
}

std::uint32_t BloomFilter::popcount() const noexcept {
    std::uint32_t total = 0;
    for (std::uint64_t w : words_) total += static_cast<std::uint32_t>(std::popcount(w));
    return total;
}

bool BloomFilter::test_bit(std::uint32_t index) const noexcept {
    if (index >= bits_) return false;
    return (words_[index >> 6] >> (index & 63)) & 1U;
}

void BloomFilter::set_bit(std::uint32_t index) noexcept {
    if (index >= bits_) return;
    words_[index >> 6] |= std::uint64_t{1} << (index & 63);
}

std::size_t BloomFilter::serialized_size(std::uint32_t bits) noexcept {
    return kWireHeaderSize + (static_cast<std::size_t>(bits) + 7) / 8;
}

std::vector<std::uint8_t> BloomFilter::serialize() const {
    if (num_hashes_ > std::numeric_limits<std::uint8_t>::max()) {
        throw SignalFormatError("hash count does not fit the u8 wire field");
    }
    if (inserted_ > std::numeric_limits<std::uint16_t>::max()) {
        throw SignalFormatError("inserted count does not fit the u16 wire field");
    }
    std::vector<std::uint8_t> out;
    out.reserve(serialized_size(bits_));
    out.insert(out.end(), {'T', 'I', 'P', 'S', kWireVersion});
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits_ >> (8 * i)));
    out.push_back(static_cast<std::uint8_t>(num_hashes_));
    out.push_back(static_cast<std::uint8_t>(inserted_ & 0xff));
    out.push_back(static_cast<std::uint8_t>(inserted_ >> 8));
    const std::size_t nbytes = (static_cast<std::size_t>(bits_) + 7) / 8;
    for (std::size_t i = 0; i < nbytes; ++i) {
        out.push_back(static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8))));
    }
    return out;
}

BloomFilter BloomFilter::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kWireHeaderSize) throw SignalFormatError("signal shorter than its fixed header");
    if (std::memcmp(bytes.data(), "TIPS", 4) != 0) throw SignalFormatError("bad signal magic");
    if (bytes[4] != kWireVersion) {
        throw SignalFormatError("unsupported signal version " + std::to_string(bytes[4]));
    }
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | bytes[5 + i];
    const std::uint32_t hashes = bytes[9];
    const std::uint64_t inserted = static_cast<std::uint64_t>(bytes[10]) | (static_cast<std::uint64_t>(bytes[11]) << 8);
    if (bits == 0 || hashes == 0) throw SignalFormatError("signal declares an empty filter shape");
    if (bytes.size() != serialized_size(bits)) {
        throw SignalFormatError("signal length " + std::to_string(bytes.size()) + " does not match b = " +
                                std::to_string(bits));
    }
    BloomFilter filter(bits, hashes);
    filter.inserted_ = inserted;
    const std::size_t nbytes = (static_cast<std::size_t>(bits) + 7) / 8;
    for (std::size_t i = 0; i < nbytes; ++i) {
        filter.words_[i / 8] |= static_cast<std::uint64_t>(bytes[kWireHeaderSize + i]) << (8 * (i % 8));
    }
    // Padding bits past b must be zero so that equal filters have equal bytes.
    if (bits % 64 != 0) {
        const std::uint64_t mask = (std::uint64_t{1} << (bits % 64)) - 1;
        if ((filter.words_.back() & ~mask) != 0) throw SignalFormatError("padding bits set past b");
    }
    return filter;
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

double bf_false_positive_rate(std::uint64_t bits, std::uint32_t num_hashes, std::uint64_t inserted) {
    if (bits == 0 || num_hashes == 0) throw std::invalid_argument("b and h must be positive");
    const double h = num_hashes;
    const double fill = -std::expm1(-h * static_cast<double>(inserted) / static_cast<double>(bits));
    return std::pow(fill, h);
}

double bf_expected_popcount(std::uint64_t bits, std::uint32_t num_hashes, std::uint64_t inserted) {
    if (bits == 0 || num_hashes == 0) throw std::invalid_argument("b and h must be positive");
    const double b = static_cast<double>(bits);
    const double draws = static_cast<double>(num_hashes) * static_cast<double>(inserted);
    // b (1 - (1 - 1/b)^{hn}), with log1p for b large.
    return -b * std::expm1(draws * std::log1p(-1.0 / b));
}

double bf_flood_threshold(std::uint64_t bits, std::uint32_t num_hashes, std::uint64_t inserted, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
    const double slack = std::sqrt(-0.5 * static_cast<double>(num_hashes) * static_cast<double>(inserted) *
                                   std::log(eta));
    return bf_expected_popcount(bits, num_hashes, inserted) + slack;
}

FloodPolicy::FloodPolicy(std::uint32_t bits, std::uint32_t num_hashes, std::uint64_t expected_tx_count,
                         double reject_prob_valid)
    : bits_(bits),
      num_hashes_(num_hashes),
      expected_tx_count_(expected_tx_count),
      reject_prob_valid_(reject_prob_valid) {
    if (!(reject_prob_valid > 0.0 && reject_prob_valid < 1.0)) {
        throw std::invalid_argument("reject_prob_valid must lie strictly between 0 and 1");
    }
    threshold_ = bf_flood_threshold(bits, num_hashes, expected_tx_count, reject_prob_valid);
}

FilterVerdict bf_validate(const BloomFilter& filter, const FloodPolicy& policy) {
    if (filter.bit_count() != policy.bits() || filter.num_hashes() != policy.num_hashes()) {
        throw DimensionMismatch("filter shape (" + std::to_string(filter.bit_count()) + ", " +
                                std::to_string(filter.num_hashes()) + ") does not match policy shape (" +
                                std::to_string(policy.bits()) + ", " + std::to_string(policy.num_hashes()) + ")");
    }
    return static_cast<double>(filter.popcount()) >= policy.threshold() ? FilterVerdict::kReject
                                                                         : FilterVerdict::kAccept;
}

} // namespace tips
