// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include "tips/bloom.h"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tips {

using BlockId = std::uint64_t;
inline constexpr BlockId kGenesisId = 0;

struct TxIdHash {
    std::size_t operator()(const TxId& id) const noexcept;
};

struct Transaction {
    TxId id{};
    double fee = 0.0;
    double arrival_time = 0.0;
    std::uint32_t size_bytes = 500;
};

struct BlockHeader {
    BlockId id = 0;
    std::uint32_t miner = 0;
    double mine_time = 0.0;
    std::vector<BlockId> parent_ids;
    BloomFilter signal;
    bool pow_valid = true;
};

struct BlockBody {
    BlockId header_id = 0;
    std::vector<TxId> tx_ids;
};

// Headers and bodies are immutable once mined; every node shares them.
using HeaderPtr = std::shared_ptr<const BlockHeader>;
using BodyPtr = std::shared_ptr<const BlockBody>;

struct MinedBlock {
    HeaderPtr header;
    BodyPtr body;
};

/// A pooled transaction. The expected value is never stored: it is
/// base fee * epsilon^{|pending_signals|}, so resolving every signal restores
/// the fee exactly.
struct PoolEntry {
    Transaction tx;
    BloomKey key;
    std::vector<BlockId> pending_signals;

    double base_fee() const noexcept { return tx.fee; }
};

double expected_value(const PoolEntry& entry, double epsilon);

struct ProtocolConfig {
    double epsilon = 0.0217;
    std::size_t pool_capacity = 10000;
    std::size_t block_size = 2000;
    double header_timeout = 30.0;
    std::uint32_t bloom_bits = 16000;
    std::uint32_t bloom_hashes = 5;
    std::optional<FloodPolicy> flood_policy;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

enum class Outcome {
    kAccepted,
    kDuplicate,
    kDropped,
    kRejectedInvalidPow,
    kRejectedBadSignal,
    kRejectedFlood,
    kRejectedUnknownHeader,
    kRejectedExpired,
    kRejectedInvalidBody,
    kExpired,
    kIgnored,
};

const char* to_string(Outcome outcome) noexcept;

enum class HeaderStatus { kAwaiting, kAccepted, kInvalid, kExpired };

/// Comparable dump of a node's state, used to check trace replay.
struct NodeSnapshot {
    struct Entry {
        TxId id;
        double fee;
        std::vector<BlockId> pending;
        friend bool operator==(const Entry&, const Entry&) = default;
    };
    std::vector<Entry> pool;
    std::vector<BlockId> ledger;
    std::vector<std::pair<BlockId, double>> awaiting;
    std::vector<std::pair<BlockId, HeaderStatus>> headers;
    std::vector<BlockId> tips;
    std::size_t included = 0;
    friend bool operator==(const NodeSnapshot&, const NodeSnapshot&) = default;
};

/// One node running the TIPS mining process: pool with expected values,
/// header-first signal handling, body validation, header expiry, and the DAG
/// ledger. Events must be applied in non-decreasing time order.
class NodeState {
public:
    explicit NodeState(ProtocolConfig config);

    Outcome on_receive_transaction(const Transaction& tx);
    /// Same, with the filter key precomputed by the caller.
    Outcome on_receive_transaction(const Transaction& tx, const BloomKey& key);
    Outcome on_receive_header(const HeaderPtr& header, double now);
    Outcome on_receive_body(const BodyPtr& body, double now);
    Outcome on_header_expired(BlockId header_id, double now);

    /// Builds the block, removes the chosen transactions from the pool and
    /// appends the block to the local ledger. Throws std::invalid_argument if
    /// more than n ids are chosen or an id is not pooled.
    MinedBlock on_mine_block(double now, std::span<const TxId> chosen, BlockId id, std::uint32_t miner);

    /// Same block as on_mine_block would produce, without touching the state.
    MinedBlock assemble_block(double now, std::span<const TxId> chosen, BlockId id, std::uint32_t miner) const;

    const ProtocolConfig& config() const noexcept { return config_; }

    std::size_t pool_size() const noexcept { return pool_.size(); }
    const PoolEntry* find(const TxId& id) const;
    std::optional<double> value_of(const TxId& id) const;
    /// Lowest expected value in the pool (the next eviction victim); 0 if empty.
    double min_value() const noexcept;
    /// True if on_receive_transaction(tx) would leave the pool unchanged
    /// because tx would be the eviction victim.
    bool would_drop(const Transaction& tx) const;

    /// Pool entries by descending expected value, ascending id on ties.
    std::vector<const PoolEntry*> pool_by_value() const;

    std::vector<BlockId> tips() const;
    bool in_ledger(BlockId id) const { return ledger_.contains(id); }
    std::size_t ledger_size() const noexcept { return ledger_.size(); }
    std::optional<HeaderStatus> header_status(BlockId id) const;
    std::optional<double> expiry(BlockId id) const;
    std::size_t awaiting_count() const noexcept { return awaiting_.size(); }
    bool is_included(const TxId& id) const { return included_.contains(id); }

    NodeSnapshot snapshot() const;

private:
    struct OrderKey {
        double value;
        TxId id;
        friend auto operator<=>(const OrderKey&, const OrderKey&) = default;
    };
    struct Awaiting {
        HeaderPtr header;
        double expiry;
        std::vector<TxId> hits;
    };
    struct LedgerBlock {
        HeaderPtr header;
        BodyPtr body;
    };

    double value_for(const PoolEntry& entry) const;
    void add_signal(PoolEntry& entry, BlockId header_id);
    void drop_signal(PoolEntry& entry, BlockId header_id);
    void release_signal(const Awaiting& awaiting, BlockId header_id);
    void remove_from_pool(const TxId& id);
    void append_to_ledger(const HeaderPtr& header, const BodyPtr& body);
    bool body_matches(const BlockHeader& header, const BlockBody& body) const;
    MinedBlock build_block(double now, std::span<const TxId> chosen, BlockId id, std::uint32_t miner) const;

    ProtocolConfig config_;
    mutable std::vector<double> epsilon_powers_;
    std::unordered_map<TxId, PoolEntry, TxIdHash> pool_;
    std::set<OrderKey> order_;
    std::map<BlockId, Awaiting> awaiting_;
    std::unordered_map<BlockId, HeaderStatus> header_status_;
    std::map<BlockId, LedgerBlock> ledger_;
    std::set<BlockId> tips_;
    std::unordered_set<BlockId> referenced_;
    std::unordered_set<TxId, TxIdHash> included_;
};

} // namespace tips
