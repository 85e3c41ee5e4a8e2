// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/protocol.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace tips {

std::size_t TxIdHash::operator()(const TxId& id) const noexcept {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::memcpy(&a, id.data(), 8);
    std::memcpy(&b, id.data() + 8, 8);
    return static_cast<std::size_t>(a ^ (b * 0x9e3779b97f4a7c15ULL));
}

double expected_value(const PoolEntry& entry, double epsilon) {
    double v = entry.base_fee();
    for (std::size_t k = 0; k < entry.pending_signals.size(); ++k) v *= epsilon;
    return v;
}

void ProtocolConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0,1)");
    if (block_size == 0) throw std::invalid_argument("block size n must be at least 1");
    if (pool_capacity < block_size) throw std::invalid_argument("pool capacity m must be at least n");
    if (!(header_timeout > 0.0)) throw std::invalid_argument("header timeout T must be positive");
    if (bloom_bits == 0 || bloom_hashes == 0) throw std::invalid_argument("bloom dimensions must be positive");
    if (flood_policy && (flood_policy->bits() != bloom_bits || flood_policy->num_hashes() != bloom_hashes))
        throw std::invalid_argument("flood policy dimensions differ from the signal dimensions");
}

const char* to_string(Outcome outcome) noexcept {
    switch (outcome) {
    case Outcome::kAccepted: return "accepted";
    case Outcome::kDuplicate: return "duplicate";
    case Outcome::kDropped: return "dropped";
    case Outcome::kRejectedInvalidPow: return "rejected_invalid_pow";
    case Outcome::kRejectedBadSignal: return "rejected_bad_signal";
    case Outcome::kRejectedFlood: return "rejected_flood";
    case Outcome::kRejectedUnknownHeader: return "rejected_unknown_header";
    case Outcome::kRejectedExpired: return "rejected_expired";
    case Outcome::kRejectedInvalidBody: return "rejected_invalid_body";
    case Outcome::kExpired: return "expired";
    case Outcome::kIgnored: return "ignored";
    }
    return "unknown";
}

NodeState::NodeState(ProtocolConfig config) : config_(std::move(config)) {
    config_.validate();
    epsilon_powers_.push_back(1.0);
    ledger_.emplace(kGenesisId, LedgerBlock{});
    header_status_.emplace(kGenesisId, HeaderStatus::kAccepted);
    tips_.insert(kGenesisId);
}

double NodeState::value_for(const PoolEntry& entry) const {
    const std::size_t k = entry.pending_signals.size();
    while (epsilon_powers_.size() <= k) epsilon_powers_.push_back(epsilon_powers_.back() * config_.epsilon);
    return entry.base_fee() * epsilon_powers_[k];
}

void NodeState::add_signal(PoolEntry& entry, BlockId header_id) {
    order_.erase(OrderKey{value_for(entry), entry.tx.id});
    entry.pending_signals.push_back(header_id);
    order_.insert(OrderKey{value_for(entry), entry.tx.id});
}

void NodeState::drop_signal(PoolEntry& entry, BlockId header_id) {
    auto it = std::find(entry.pending_signals.begin(), entry.pending_signals.end(), header_id);
    if (it == entry.pending_signals.end()) return;
    order_.erase(OrderKey{value_for(entry), entry.tx.id});
    entry.pending_signals.erase(it);
    order_.insert(OrderKey{value_for(entry), entry.tx.id});
}

void NodeState::release_signal(const Awaiting& awaiting, BlockId header_id) {
    for (const TxId& id : awaiting.hits) {
        auto it = pool_.find(id);
        if (it != pool_.end()) drop_signal(it->second, header_id);
    }
}

void NodeState::remove_from_pool(const TxId& id) {
    auto it = pool_.find(id);
    if (it == pool_.end()) return;
    order_.erase(OrderKey{value_for(it->second), id});
    pool_.erase(it);
}

void NodeState::append_to_ledger(const HeaderPtr& header, const BodyPtr& body) {
    ledger_.emplace(header->id, LedgerBlock{header, body});
    header_status_[header->id] = HeaderStatus::kAccepted;
    for (BlockId parent : header->parent_ids) {
        referenced_.insert(parent);
        tips_.erase(parent);
    }
    if (!referenced_.contains(header->id)) tips_.insert(header->id);
}

Outcome NodeState::on_receive_transaction(const Transaction& tx) {
    if (pool_.contains(tx.id) || included_.contains(tx.id)) return Outcome::kDuplicate;
    return on_receive_transaction(tx, bloom_key(tx.id));
}

Outcome NodeState::on_receive_transaction(const Transaction& tx, const BloomKey& key) {
    if (pool_.contains(tx.id) || included_.contains(tx.id)) return Outcome::kDuplicate;
    if (!(tx.fee >= 0.0)) throw std::invalid_argument("transaction fee must be non-negative");
    if (would_drop(tx)) return Outcome::kDropped;
    PoolEntry entry{tx, key, {}};
    order_.insert(OrderKey{tx.fee, tx.id});
    pool_.emplace(tx.id, std::move(entry));
    if (pool_.size() > config_.pool_capacity) {
        const TxId victim = order_.begin()->id;
        remove_from_pool(victim);
    }
    return Outcome::kAccepted;
}

bool NodeState::would_drop(const Transaction& tx) const {
    if (pool_.size() < config_.pool_capacity || order_.empty()) return false;
    return OrderKey{tx.fee, tx.id} < *order_.begin();
}

Outcome NodeState::on_receive_header(const HeaderPtr& header, double now) {
    if (!header) throw std::invalid_argument("null header");
    if (header_status_.contains(header->id)) return Outcome::kDuplicate;
    if (!header->pow_valid) return Outcome::kRejectedInvalidPow;
    const BloomFilter& signal = header->signal;
    if (signal.bit_count() != config_.bloom_bits || signal.num_hashes() != config_.bloom_hashes)
        return Outcome::kRejectedBadSignal;
    if (config_.flood_policy && bf_validate(signal, *config_.flood_policy) == FilterVerdict::kReject)
        return Outcome::kRejectedFlood;

    Awaiting awaiting{header, now + config_.header_timeout, {}};
    for (auto& [id, entry] : pool_) {
        if (signal.contains(entry.key)) awaiting.hits.push_back(id);
    }
    for (const TxId& id : awaiting.hits) add_signal(pool_.at(id), header->id);
    awaiting_.emplace(header->id, std::move(awaiting));
    header_status_.emplace(header->id, HeaderStatus::kAwaiting);
    return Outcome::kAccepted;
}

bool NodeState::body_matches(const BlockHeader& header, const BlockBody& body) const {
    if (body.tx_ids.size() > config_.block_size) return false;
    BloomFilter rebuilt(header.signal.bit_count(), header.signal.num_hashes());
    std::vector<TxId> sorted(body.tx_ids);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    for (const TxId& id : body.tx_ids) rebuilt.insert(id);
    return rebuilt == header.signal;
}

Outcome NodeState::on_receive_body(const BodyPtr& body, double now) {
    if (!body) throw std::invalid_argument("null body");
    auto status = header_status_.find(body->header_id);
    if (status == header_status_.end()) return Outcome::kRejectedUnknownHeader;
    switch (status->second) {
    case HeaderStatus::kExpired: return Outcome::kRejectedExpired;
    case HeaderStatus::kAccepted:
    case HeaderStatus::kInvalid: return Outcome::kDuplicate;
    case HeaderStatus::kAwaiting: break;
    }
    auto it = awaiting_.find(body->header_id);
    if (now >= it->second.expiry) {
        on_header_expired(body->header_id, now);
        return Outcome::kRejectedExpired;
    }
    Awaiting awaiting = std::move(it->second);
    awaiting_.erase(it);

    if (!body_matches(*awaiting.header, *body)) {
        release_signal(awaiting, body->header_id);
        status->second = HeaderStatus::kInvalid;
        return Outcome::kRejectedInvalidBody;
    }
    for (const TxId& id : body->tx_ids) {
        remove_from_pool(id);
        included_.insert(id);
    }
    release_signal(awaiting, body->header_id);
    append_to_ledger(awaiting.header, body);
    return Outcome::kAccepted;
}

Outcome NodeState::on_header_expired(BlockId header_id, double now) {
    auto it = awaiting_.find(header_id);
    if (it == awaiting_.end() || now < it->second.expiry) return Outcome::kIgnored;
    Awaiting awaiting = std::move(it->second);
    awaiting_.erase(it);
    release_signal(awaiting, header_id);
    header_status_[header_id] = HeaderStatus::kExpired;
    return Outcome::kExpired;
}

MinedBlock NodeState::build_block(double now, std::span<const TxId> chosen, BlockId id, std::uint32_t miner) const {
    if (chosen.size() > config_.block_size)
        throw std::invalid_argument("block holds " + std::to_string(chosen.size()) + " transactions, limit is " +
                                    std::to_string(config_.block_size));
    if (header_status_.contains(id)) throw std::invalid_argument("block id " + std::to_string(id) + " already used");
    auto header = std::make_shared<BlockHeader>(BlockHeader{
        id, miner, now, {tips_.begin(), tips_.end()}, BloomFilter(config_.bloom_bits, config_.bloom_hashes), true});
    auto body = std::make_shared<BlockBody>();
    body->header_id = id;
    body->tx_ids.reserve(chosen.size());
    for (const TxId& tx : chosen) {
        auto entry = pool_.find(tx);
        if (entry == pool_.end()) throw std::invalid_argument("chosen transaction is not in the pool");
        header->signal.insert(entry->second.key);
        body->tx_ids.push_back(tx);
    }
    std::vector<TxId> sorted(body->tx_ids);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("chosen transactions contain a duplicate");
    return MinedBlock{std::move(header), std::move(body)};
}

MinedBlock NodeState::assemble_block(double now, std::span<const TxId> chosen, BlockId id, std::uint32_t miner) const {
    return build_block(now, chosen, id, miner);
}

MinedBlock NodeState::on_mine_block(double now, std::span<const TxId> chosen, BlockId id, std::uint32_t miner) {
    MinedBlock block = build_block(now, chosen, id, miner);
    for (const TxId& tx : block.body->tx_ids) {
        remove_from_pool(tx);
        included_.insert(tx);
    }
    append_to_ledger(block.header, block.body);
    return block;
}

const PoolEntry* NodeState::find(const TxId& id) const {
    auto it = pool_.find(id);
    return it == pool_.end() ? nullptr : &it->second;
}

std::optional<double> NodeState::value_of(const TxId& id) const {
    const PoolEntry* entry = find(id);
    if (!entry) return std::nullopt;
    return value_for(*entry);
}

double NodeState::min_value() const noexcept {
    return order_.empty() ? 0.0 : order_.begin()->value;
}

std::vector<const PoolEntry*> NodeState::pool_by_value() const {
    std::vector<const PoolEntry*> out;
    out.reserve(pool_.size());
    // order_ ascends by (value, id); walk it backwards and flip each run of
    // equal values so ties come out by ascending id.
    auto it = order_.rbegin();
    while (it != order_.rend()) {
        auto run_end = it;
        while (run_end != order_.rend() && run_end->value == it->value) ++run_end;
        const std::size_t start = out.size();
        for (auto r = it; r != run_end; ++r) out.push_back(&pool_.at(r->id));
        std::reverse(out.begin() + static_cast<std::ptrdiff_t>(start), out.end());
        it = run_end;
    }
    return out;
}

std::vector<BlockId> NodeState::tips() const {
    return {tips_.begin(), tips_.end()};
}

std::optional<HeaderStatus> NodeState::header_status(BlockId id) const {
    auto it = header_status_.find(id);
    if (it == header_status_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> NodeState::expiry(BlockId id) const {
    auto it = awaiting_.find(id);
    if (it == awaiting_.end()) return std::nullopt;
    return it->second.expiry;
}

NodeSnapshot NodeState::snapshot() const {
    NodeSnapshot snap;
    snap.pool.reserve(pool_.size());
    for (const auto& [id, entry] : pool_) {
        std::vector<BlockId> pending(entry.pending_signals);
        std::sort(pending.begin(), pending.end());
        snap.pool.push_back({id, entry.base_fee(), std::move(pending)});
    }
    std::sort(snap.pool.begin(), snap.pool.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& [id, block] : ledger_) snap.ledger.push_back(id);
    for (const auto& [id, a] : awaiting_) snap.awaiting.emplace_back(id, a.expiry);
    for (const auto& [id, st] : header_status_) snap.headers.emplace_back(id, st);
    std::sort(snap.headers.begin(), snap.headers.end());
    snap.tips = tips();
    snap.included = included_.size();
    return snap;
}

} // namespace tips
