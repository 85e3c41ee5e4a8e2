// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace tips {

/// Opaque 32-byte transaction identifier. Ordered lexicographically.
using TxId = std::array<std::uint8_t, 32>;

/// The 128-bit hash of a transaction id, split into the two halves used by
/// double hashing. Pools cache it so that a filter query is h additions.
struct BloomKey {
    std::uint64_t h1 = 0;
    std::uint64_t h2 = 0;
    friend bool operator==(const BloomKey&, const BloomKey&) = default;
};

/// SipHash-2-4 (128-bit output) of the id under the fixed signal key.
BloomKey bloom_key(const TxId& id) noexcept;

class SignalFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bloom filter carried in a block header as the inclusion signal.
///
/// Bit g_i = (h1 + i * step) mod b for i in [0, h), where
/// step = 1 + (h2 mod (b - 1)). Bits are stored LSB-first within bytes, which
/// is also the wire order.
class BloomFilter {
public:
    BloomFilter(std::uint32_t bits, std::uint32_t num_hashes);

    void insert(const TxId& id) { insert(bloom_key(id)); }
    void insert(const BloomKey& key) noexcept;
    bool contains(const TxId& id) const noexcept { return contains(bloom_key(id)); }
    bool contains(const BloomKey& key) const noexcept;

    std::uint32_t bit_count() const noexcept { return bits_; }
    std::uint32_t num_hashes() const noexcept { return num_hashes_; }
    std::uint64_t inserted_count() const noexcept { return inserted_; }
    std::uint32_t popcount() const noexcept;

    bool test_bit(std::uint32_t index) const noexcept;
    /// Raw bit write; used to build adversarial filters. Does not count as an insert.
    void set_bit(std::uint32_t index) noexcept;

    /// Bit positions the key maps to, in hash order.
    std::vector<std::uint32_t> positions(const BloomKey& key) const;

    /// Wire encoding:
    /// "TIPS" | version u8 = 1 | b u32 LE | h u8 | inserted u16 LE | ceil(b/8) bytes LSB-first.
    std::vector<std::uint8_t> serialize() const;
    static BloomFilter deserialize(std::span<const std::uint8_t> bytes);
    static std::size_t serialized_size(std::uint32_t bits) noexcept;

    friend bool operator==(const BloomFilter&, const BloomFilter&) = default;

private:
    std::uint32_t bits_;
    std::uint32_t num_hashes_;
    std::uint64_t inserted_ = 0;
    std::vector<std::uint64_t> words_;
};

/// False-positive rate (1 - e^{-hn/b})^h.
double bf_false_positive_rate(std::uint64_t bits, std::uint32_t num_hashes, std::uint64_t inserted);

/// b - b (1 - 1/b)^{hn}: expected number of set bits after n inserts.
double bf_expected_popcount(std::uint64_t bits, std::uint32_t num_hashes, std::uint64_t inserted);

/// Largest popcount an honest filter may have: the expected popcount plus
/// sqrt(-h n ln(eta) / 2). Filters with popcount >= this value are rejected.
double bf_flood_threshold(std::uint64_t bits, std::uint32_t num_hashes, std::uint64_t inserted, double eta);

/// Anti-flood acceptance rule for signals of one (b, h) shape.
class FloodPolicy {
public:
    FloodPolicy(std::uint32_t bits, std::uint32_t num_hashes, std::uint64_t expected_tx_count,
                double reject_prob_valid);

    std::uint32_t bits() const noexcept { return bits_; }
    std::uint32_t num_hashes() const noexcept { return num_hashes_; }
    std::uint64_t expected_tx_count() const noexcept { return expected_tx_count_; }
    double reject_prob_valid() const noexcept { return reject_prob_valid_; }
    double threshold() const noexcept { return threshold_; }

private:
    std::uint32_t bits_;
    std::uint32_t num_hashes_;
    std::uint64_t expected_tx_count_;
    double reject_prob_valid_;
    double threshold_;
};

enum class FilterVerdict { kAccept, kReject };

/// Rejects iff popcount >= policy threshold. Throws DimensionMismatch when the
/// filter's (b, h) differ from the policy's.
FilterVerdict bf_validate(const BloomFilter& filter, const FloodPolicy& policy);

} // namespace tips
