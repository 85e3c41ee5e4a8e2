// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/simengine.h"

#include "tips/rng.h"
#include "tips/strategies.h"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace tips {

// ---------------------------------------------------------------------------
// Names and configuration
// ---------------------------------------------------------------------------

const char* to_string(ProtocolKind kind) noexcept {
    return kind == ProtocolKind::kTips ? "tips" : "standard";
}

const char* to_string(StrategyKind kind) noexcept {
    switch (kind) {
    case StrategyKind::kRandom: return "rand";
    case StrategyKind::kPriority: return "priority";
    case StrategyKind::kTopN: return "topn";
    case StrategyKind::kEquilibrium: return "equilibrium";
    }
    return "unknown";
}

const char* to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::kTxArrival: return "tx_arrival";
    case EventKind::kMine: return "mine";
    case EventKind::kHeaderRecv: return "header_recv";
    case EventKind::kBodyRecv: return "body_recv";
    case EventKind::kHeaderExpire: return "header_expire";
    }
    return "unknown";
}

ProtocolKind parse_protocol(const std::string& name) {
    if (name == "tips") return ProtocolKind::kTips;
    if (name == "standard") return ProtocolKind::kStandard;
    throw std::invalid_argument("unknown protocol '" + name + "' (expected standard or tips)");
}

StrategyKind parse_strategy(const std::string& name) {
    if (name == "rand" || name == "random") return StrategyKind::kRandom;
    if (name == "priority") return StrategyKind::kPriority;
    if (name == "topn" || name == "top-n") return StrategyKind::kTopN;
    if (name == "equilibrium" || name == "eq") return StrategyKind::kEquilibrium;
    throw std::invalid_argument("unknown strategy '" + name + "' (expected rand, priority, topn or equilibrium)");
}

namespace {

double to_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
        throw std::invalid_argument("'" + key + "' expects a number, got '" + value + "'");
    return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw std::invalid_argument("'" + key + "' expects a non-negative integer, got '" + value + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("'" + key + "' expects true or false, got '" + value + "'");
}

} // namespace

bool set_config_field(SimConfig& c, const std::string& key, const std::string& value) {
    if (key == "num_miners") c.num_miners = to_uint(key, value);
    else if (key == "protocol") c.protocol = parse_protocol(value);
    else if (key == "strategy") c.strategy = parse_strategy(value);
    else if (key == "variant") {
        // "protocol/strategy", used by sweeps over combinations.
        const auto slash = value.find('/');
        if (slash == std::string::npos) throw std::invalid_argument("'variant' expects protocol/strategy");
        c.protocol = parse_protocol(value.substr(0, slash));
        c.strategy = parse_strategy(value.substr(slash + 1));
    }
    else if (key == "lambda") c.lambda = to_double(key, value);
    else if (key == "delta_mean") c.delta_mean = to_double(key, value);
    else if (key == "delta_stddev") c.delta_stddev = to_double(key, value);
    else if (key == "tau_mean") c.tau_mean = to_double(key, value);
    else if (key == "tau_stddev") c.tau_stddev = to_double(key, value);
    else if (key == "tx_rate") c.tx_rate = to_double(key, value);
    else if (key == "fee_dist") {
        if (value == "uniform") c.fee_dist = FeeDistribution::kUniform;
        else if (value == "custom") c.fee_dist = FeeDistribution::kCustom;
        else throw std::invalid_argument("'fee_dist' expects uniform or custom, got '" + value + "'");
    }
    else if (key == "fee_values") {
        c.fee_values.clear();
        for (const auto& v : split_list(value)) c.fee_values.push_back(to_double(key, v));
        c.fee_dist = FeeDistribution::kCustom;
    }
    else if (key == "n") c.n = to_uint(key, value);
    else if (key == "m") c.m = to_uint(key, value);
    else if (key == "bloom_bits") c.bloom_bits = static_cast<std::uint32_t>(to_uint(key, value));
    else if (key == "bloom_hashes") c.bloom_hashes = static_cast<std::uint32_t>(to_uint(key, value));
    else if (key == "epsilon") c.epsilon = to_double(key, value);
    else if (key == "header_timeout") c.header_timeout = to_double(key, value);
    else if (key == "flood_eta") c.flood_eta = to_double(key, value);
    else if (key == "horizon") c.horizon = to_double(key, value);
    else if (key == "seed") c.seed = to_uint(key, value);
    else if (key == "initial_pool") c.initial_pool = to_uint(key, value);
    else if (key == "own_block_delivery") {
        if (value == "network") c.own_block_delivery = OwnBlockDelivery::kNetwork;
        else if (value == "immediate") c.own_block_delivery = OwnBlockDelivery::kImmediate;
        else throw std::invalid_argument("'own_block_delivery' expects network or immediate, got '" + value + "'");
    }
    else if (key == "record_trace") c.record_trace = to_bool(key, value);
    else return false;
    return true;
}

namespace {

bool set_attacker_field(SimConfig& c, const std::string& key, const std::string& value) {
    if (key == "type") {
        if (value == "none") {
            c.flood.reset();
            c.delay.reset();
        } else if (value == "flood") {
            c.delay.reset();
            if (!c.flood) c.flood.emplace();
        } else if (value == "delay") {
            c.flood.reset();
            if (!c.delay) c.delay.emplace();
        } else {
            throw std::invalid_argument("attacker 'type' expects none, flood or delay, got '" + value + "'");
        }
        return true;
    }
    if (key == "rate") {
        if (!c.flood) throw std::invalid_argument("'rate' needs 'type = flood' first");
        c.flood->signals_per_second = to_double(key, value);
        return true;
    }
    if (key == "alpha" || key == "target_fee" || key == "episode_gap" || key == "episodes") {
        if (!c.delay) throw std::invalid_argument("'" + key + "' needs 'type = delay' first");
        if (key == "alpha") c.delay->alpha = to_double(key, value);
        else if (key == "target_fee") c.delay->target_fee = to_double(key, value);
        else if (key == "episode_gap") c.delay->episode_gap = to_double(key, value);
        else c.delay->stop_after_episodes = to_uint(key, value);
        return true;
    }
    return false;
}

} // namespace

SimConfig apply_config(SimConfig base, const ConfigFile& file, const std::vector<const ConfigEntry*>& entries) {
    for (const ConfigEntry* e : entries) {
        try {
            const bool known = e->section == "attacker" ? set_attacker_field(base, e->key, e->value)
                                                        : set_config_field(base, e->key, e->value);
            if (!known) file.fail(*e, "unknown key '" + e->key + "'");
        } catch (const std::invalid_argument& err) {
            file.fail(*e, err.what());
        }
    }
    return base;
}

SimConfig parse_sim_config(const ConfigFile& file) {
    std::vector<const ConfigEntry*> entries;
    for (const auto& e : file.entries) {
        if (e.section.empty() || e.section == "sim" || e.section == "attacker") entries.push_back(&e);
        else file.fail(e, "unknown section [" + e.section + "]");
    }
    SimConfig c = apply_config(SimConfig{}, file, entries);
    (void)resolve_entries(c, file, entries);
    return c;
}

SimConfig resolve_entries(const SimConfig& config, const ConfigFile& file,
                          const std::vector<const ConfigEntry*>& entries) {
    try {
        return config.resolved();
    } catch (const InvalidSimConfig& err) {
        const auto& fields = err.fields();
        for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
            std::string key = (*it)->key;
            if ((*it)->section == "attacker" && key == "type") key = "attacker";
            if (key == "variant") key = "protocol";
            if (std::find(fields.begin(), fields.end(), key) != fields.end()) file.fail(**it, err.what());
        }
        throw ConfigError(file.source, 0, err.what());
    }
}

SimConfig SimConfig::resolved() const {
    SimConfig c = *this;
    auto require = [](bool ok, std::vector<std::string> fields, const char* message) {
        if (!ok) throw InvalidSimConfig(std::move(fields), message);
    };
    require(c.num_miners >= 1, {"num_miners"}, "num_miners must be at least 1");
    require(c.lambda > 0.0, {"lambda"}, "lambda must be positive");
    require(c.delta_mean > 0.0, {"delta_mean"}, "delta_mean must be positive");
    require(c.tau_mean > 0.0, {"tau_mean"}, "tau_mean must be positive");
    require(c.tx_rate > 0.0, {"tx_rate"}, "tx_rate must be positive");
    require(c.horizon > 0.0, {"horizon"}, "horizon must be positive");
    require(c.n >= 1, {"n"}, "n must be at least 1");
    require(c.m >= c.n, {"m", "n"}, "m must be at least n");
    require(c.bloom_hashes >= 1 && c.bloom_hashes <= 255, {"bloom_hashes"}, "bloom_hashes must be in [1, 255]");
    if (c.delta_stddev < 0.0) c.delta_stddev = 0.1 * c.delta_mean;
    if (c.tau_stddev < 0.0) c.tau_stddev = 0.1 * c.tau_mean;
    if (c.bloom_bits == 0) c.bloom_bits = static_cast<std::uint32_t>(8 * c.n);
    if (c.epsilon == 0.0) c.epsilon = bf_false_positive_rate(c.bloom_bits, c.bloom_hashes, c.n);
    require(c.epsilon > 0.0 && c.epsilon < 1.0, {"epsilon", "bloom_bits", "bloom_hashes", "n"}, "epsilon must be in (0, 1)");
    if (c.header_timeout == 0.0) c.header_timeout = 3.0 * c.delta_mean;
    require(c.header_timeout > 0.0, {"header_timeout"}, "header_timeout must be positive");
    require(c.flood_eta >= 0.0 && c.flood_eta < 1.0, {"flood_eta"}, "flood_eta must be in [0, 1)");
    if (c.initial_pool == SIZE_MAX) c.initial_pool = c.m;
    if (c.fee_dist == FeeDistribution::kCustom) {
        require(!c.fee_values.empty(), {"fee_dist", "fee_values"}, "fee_dist = custom needs fee_values");
        for (double f : c.fee_values) require(f >= 0.0, {"fee_values"}, "fee_values must be non-negative");
    }
    if (c.flood) {
        require(c.protocol == ProtocolKind::kTips, {"protocol", "attacker"}, "the flood attacker needs protocol = tips");
        require(c.flood->signals_per_second > 0.0, {"rate"}, "flood rate must be positive");
        require(c.flood_eta > 0.0, {"flood_eta", "attacker"}, "the flood attacker needs flood_eta > 0");
    }
    if (c.delay) {
        require(c.protocol == ProtocolKind::kTips, {"protocol", "attacker"}, "the delay attacker needs protocol = tips");
        require(c.delay->alpha > 0.0 && c.delay->alpha < 1.0, {"alpha"}, "attacker alpha must be in (0, 1)");
        require(c.delay->target_fee >= 0.0, {"target_fee"}, "target_fee must be non-negative");
        require(c.delay->episode_gap >= 0.0, {"episode_gap"}, "episode_gap must be non-negative");
    }
    return c;
}

SimConfig attach_flood_attacker(SimConfig config, double signals_per_second) {
    config.delay.reset();
    config.flood = FloodAttackConfig{signals_per_second};
    return config;
}

SimConfig attach_delay_attacker(SimConfig config, double alpha, double target_fee) {
    config.flood.reset();
    DelayAttackConfig d;
    d.alpha = alpha;
    d.target_fee = target_fee;
    config.delay = d;
    return config;
}

ProtocolConfig protocol_config(const SimConfig& c) {
    ProtocolConfig p;
    p.epsilon = c.epsilon;
    p.pool_capacity = c.m;
    p.block_size = c.n;
    p.header_timeout = c.header_timeout;
    p.bloom_bits = c.bloom_bits;
    p.bloom_hashes = c.bloom_hashes;
    if (c.protocol == ProtocolKind::kTips && c.flood_eta > 0.0)
        p.flood_policy = FloodPolicy(c.bloom_bits, c.bloom_hashes, c.n, c.flood_eta);
    return p;
}

TxId make_tx_id(std::uint64_t seed, std::uint64_t serial) {
    TxId id{};
    for (int i = 0; i < 8; ++i) id[7 - i] = static_cast<std::uint8_t>(serial >> (8 * i));
    std::uint64_t state = mix64(seed ^ 0x7478696400000000ULL) ^ serial;
    for (int w = 0; w < 3; ++w) {
        state = mix64(state + 0x9e3779b97f4a7c15ULL);
        for (int i = 0; i < 8; ++i) id[8 + 8 * w + i] = static_cast<std::uint8_t>(state >> (8 * i));
    }
    return id;
}

std::uint64_t tx_serial(const TxId& id) {
    std::uint64_t serial = 0;
    for (int i = 0; i < 8; ++i) serial = (serial << 8) | id[i];
    return serial;
}

void EventTrace::write_csv(std::ostream& out) const {
    out << "time,kind,actor,block_id,tx_count,extra\n";
    char line[160];
    for (const auto& r : records) {
        const long long actor = r.actor == kWorldActor ? -1LL : static_cast<long long>(r.actor);
        std::snprintf(line, sizeof line, "%.9f,%s,%lld,%" PRIu64 ",%" PRIu32 ",%" PRId64 "\n", r.time,
                      to_string(r.kind), actor, r.block_id, r.tx_count, r.extra);
        out << line;
    }
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

namespace {

enum class EventType : std::uint8_t { kMine, kHeaderRecv, kBodyRecv, kExpire, kAttackMine, kFlood, kInjectTarget };

struct Event {
    double time;
    std::uint64_t seq;
    EventType type;
    std::uint32_t actor;
    std::size_t block; // index into EventTrace::blocks
};

struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
        return a.time > b.time || (a.time == b.time && a.seq > b.seq);
    }
};

struct EquilibriumCache {
    std::vector<double> profile;
    std::vector<double> p;
    double delay = -1.0;
};

constexpr double kBodyAfterHeader = 1e-6;

class Simulator {
public:
    explicit Simulator(const SimConfig& config)
        : cfg_(config.resolved()), pcfg_(protocol_config(cfg_)),
          tx_time_rng_(cfg_.seed, stream::kEntityWorld, stream::kTxArrival),
          fee_rng_(cfg_.seed, stream::kEntityWorld, stream::kTxFee) {
        const std::size_t miners = cfg_.num_miners;
        nodes_.reserve(miners);
        for (std::size_t i = 0; i < miners; ++i) {
            nodes_.emplace_back(pcfg_);
            mining_rng_.emplace_back(cfg_.seed, i, stream::kMining);
            delay_rng_.emplace_back(cfg_.seed, i, stream::kDelay);
            sampling_rng_.emplace_back(cfg_.seed, i, stream::kSampling);
        }
        eq_cache_.resize(miners);
        const double attacker_share = cfg_.delay ? cfg_.delay->alpha : 0.0;
        honest_rate_ = cfg_.lambda * (1.0 - attacker_share) / static_cast<double>(miners);
        trace_.config = cfg_;
    }

    EventTrace run() {
        for (std::size_t k = 0; k < cfg_.initial_pool; ++k) deliver_new_tx(0.0, fee_sample(), false);
        next_tx_time_ = tx_time_rng_.exponential(cfg_.tx_rate);
        for (std::uint32_t i = 0; i < nodes_.size(); ++i)
            push(mining_rng_[i].exponential(honest_rate_), EventType::kMine, i, 0);
        if (cfg_.flood) {
            flood_rng_.emplace(cfg_.seed, stream::kEntityFloodAttacker, stream::kMining);
            flood_delay_rng_.emplace(cfg_.seed, stream::kEntityFloodAttacker, stream::kDelay);
            flood_bits_rng_.emplace(cfg_.seed, stream::kEntityFloodAttacker, stream::kSignal);
            push(flood_rng_->exponential(cfg_.flood->signals_per_second), EventType::kFlood, attacker_id(), 0);
        }
        if (cfg_.delay) {
            attack_rng_.emplace(cfg_.seed, stream::kEntityDelayAttacker, stream::kMining);
            attack_delay_rng_.emplace(cfg_.seed, stream::kEntityDelayAttacker, stream::kDelay);
            push(attack_rng_->exponential(cfg_.lambda * cfg_.delay->alpha), EventType::kAttackMine, attacker_id(), 0);
            push(cfg_.delay->episode_gap, EventType::kInjectTarget, attacker_id(), 0);
        }

        trace_.end_time = cfg_.horizon;
        while (!queue_.empty()) {
            const Event ev = queue_.top();
            if (ev.time > cfg_.horizon) break;
            queue_.pop();
            deliver_txs_until(ev.time);
            dispatch(ev);
            if (cfg_.delay && cfg_.delay->stop_after_episodes > 0 &&
                completed_episodes_ >= cfg_.delay->stop_after_episodes) {
                trace_.end_time = ev.time;
                break;
            }
        }
        if (trace_.end_time == cfg_.horizon) deliver_txs_until(cfg_.horizon);
        if (cfg_.record_trace)
            for (const auto& node : nodes_) trace_.final_states.push_back(node.snapshot());
        return std::move(trace_);
    }

private:
    std::uint32_t attacker_id() const { return static_cast<std::uint32_t>(nodes_.size()); }

    void push(double time, EventType type, std::uint32_t actor, std::size_t block) {
        queue_.push(Event{time, seq_++, type, actor, block});
    }

    void record(double time, EventKind kind, std::uint32_t actor, std::uint64_t id, std::uint32_t count,
                std::int64_t extra) {
        if (cfg_.record_trace) trace_.records.push_back(TraceRecord{time, kind, actor, id, count, extra});
    }

    double fee_sample() {
        if (cfg_.fee_dist == FeeDistribution::kCustom)
            return cfg_.fee_values[fee_rng_.below(cfg_.fee_values.size())];
        return fee_rng_.uniform_open();
    }

    double sample_delay(RandomStream& rng, double mean, double sd) {
        const double floor = std::min(1e-3, 0.5 * mean);
        return std::max(floor, rng.normal(mean, sd));
    }

    // Offers a new transaction to every pool at the same instant. Returns its
    // serial, or nullopt if every pool dropped it.
    std::optional<std::uint64_t> deliver_new_tx(double time, double fee, bool target) {
        ++trace_.stats.tx_generated;
        const std::uint64_t serial = trace_.txs.size();
        const Transaction tx{make_tx_id(cfg_.seed, serial), fee, time, 500};
        const BloomKey key = bloom_key(tx.id);
        bool stored = false;
        for (auto& node : nodes_) {
            if (node.would_drop(tx)) continue;
            stored |= node.on_receive_transaction(tx, key) == Outcome::kAccepted;
        }
        if (!stored) {
            // Not stored anywhere: replaying it would be a no-op, so the serial
            // is reused by the next transaction.
            ++trace_.stats.tx_dropped_everywhere;
            return std::nullopt;
        }
        trace_.txs.push_back(TxRecord{fee, time, target});
        record(time, EventKind::kTxArrival, kWorldActor, serial, 1, 0);
        return serial;
    }

    void deliver_txs_until(double time) {
        while (next_tx_time_ <= time) {
            deliver_new_tx(next_tx_time_, fee_sample(), false);
            next_tx_time_ += tx_time_rng_.exponential(cfg_.tx_rate);
        }
    }

    void dispatch(const Event& ev) {
        switch (ev.type) {
        case EventType::kMine: on_mine(ev); break;
        case EventType::kHeaderRecv: on_header(ev); break;
        case EventType::kBodyRecv: on_body(ev); break;
        case EventType::kExpire: on_expire(ev); break;
        case EventType::kAttackMine: on_attack_mine(ev); break;
        case EventType::kFlood: on_flood(ev); break;
        case EventType::kInjectTarget: on_inject_target(ev); break;
        }
    }

    // Inclusion probabilities for miner i over its pool sorted by value.
    std::vector<double> strategy_for(std::uint32_t i, const std::vector<const PoolEntry*>& pool,
                                     const std::vector<double>& values, double& delay) {
        const std::size_t n = cfg_.n;
        delay = cfg_.effective_delay();
        switch (cfg_.strategy) {
        case StrategyKind::kTopN: return strategy_top_n(values, n);
        case StrategyKind::kRandom: return strategy_random(values.size(), n);
        case StrategyKind::kPriority: return strategy_priority(values, n);
        case StrategyKind::kEquilibrium: break;
        }
        if (cfg_.protocol == ProtocolKind::kTips) {
            // p*(tau) needs epsilon < f_m / f_1 over the base fees.
            double lo = pool.front()->base_fee();
            double hi = lo;
            for (const PoolEntry* e : pool) {
                lo = std::min(lo, e->base_fee());
                hi = std::max(hi, e->base_fee());
            }
            if (!(hi > 0.0 && cfg_.epsilon < lo / hi)) {
                delay = cfg_.delta_mean;
                ++trace_.stats.equilibrium_fallbacks;
            }
        }
        EquilibriumCache& cache = eq_cache_[i];
        bool fresh = cache.delay == delay && cache.profile.size() == values.size();
        if (fresh) {
            double diff = 0.0;
            double norm = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) {
                diff += std::abs(values[k] - cache.profile[k]);
                norm += std::abs(cache.profile[k]);
            }
            fresh = norm > 0.0 && diff <= 0.01 * norm;
        }
        if (!fresh) {
            cache.p = equilibrium_strategy(values, n, cfg_.lambda, delay).strategy;
            cache.profile = values;
            cache.delay = delay;
            ++trace_.stats.equilibrium_solves;
        }
        return cache.p;
    }

    void on_mine(const Event& ev) {
        const std::uint32_t i = ev.actor;
        NodeState& node = nodes_[i];
        const auto pool = node.pool_by_value();
        std::vector<TxId> chosen;
        double predicted = 0.0;
        if (!pool.empty()) {
            std::vector<double> values(pool.size());
            for (std::size_t k = 0; k < pool.size(); ++k) values[k] = expected_value_of(*pool[k]);
            if (pool.size() <= cfg_.n) {
                for (const PoolEntry* e : pool) chosen.push_back(e->tx.id);
                const double r = reward_coefficient(1.0, cfg_.lambda, cfg_.effective_delay());
                for (double v : values) predicted += v * r;
            } else {
                double strategy_delay = 0.0;
                const std::vector<double> p = strategy_for(i, pool, values, strategy_delay);
                const double delay = cfg_.effective_delay();
                for (std::size_t k = 0; k < p.size(); ++k)
                    if (p[k] > 0.0) predicted += p[k] * values[k] * reward_coefficient(p[k], cfg_.lambda, delay);
                for (std::size_t k : realize(i, p)) chosen.push_back(pool[k]->tx.id);
            }
        }

        const BlockId id = next_block_id_++;
        const std::size_t index = trace_.blocks.size();
        const MinedBlock block = cfg_.own_block_delivery == OwnBlockDelivery::kImmediate
                                     ? node.on_mine_block(ev.time, chosen, id, i)
                                     : node.assemble_block(ev.time, chosen, id, i);
        BlockRecord rec;
        rec.id = id;
        rec.miner = i;
        rec.mine_time = ev.time;
        rec.flags = kBlockHonest;
        rec.predicted_revenue = predicted;
        rec.tx_serials.reserve(chosen.size());
        for (const TxId& t : chosen) rec.tx_serials.push_back(tx_serial(t));
        rec.header = block.header;
        rec.body = block.body;
        record(ev.time, EventKind::kMine, i, id, static_cast<std::uint32_t>(chosen.size()), kBlockHonest);
        note_honest_block(rec);
        trace_.blocks.push_back(std::move(rec));
        pending_.push_back(0);

        for (std::uint32_t j = 0; j < nodes_.size(); ++j) {
            if (j == i && cfg_.own_block_delivery == OwnBlockDelivery::kImmediate) continue;
            if (cfg_.protocol == ProtocolKind::kStandard) {
                const double d = sample_delay(delay_rng_[i], cfg_.delta_mean, cfg_.delta_stddev);
                push(ev.time + d, EventType::kHeaderRecv, j, index);
                push(ev.time + d, EventType::kBodyRecv, j, index);
            } else {
                const double dh = sample_delay(delay_rng_[i], cfg_.tau_mean, cfg_.tau_stddev);
                const double db = sample_delay(delay_rng_[i], cfg_.delta_mean, cfg_.delta_stddev);
                push(ev.time + dh, EventType::kHeaderRecv, j, index);
                push(ev.time + std::max(db, dh + kBodyAfterHeader), EventType::kBodyRecv, j, index);
            }
            pending_.back() += 2;
        }
        release_if_done(index);
        push(ev.time + mining_rng_[i].exponential(honest_rate_), EventType::kMine, i, 0);
    }

    double expected_value_of(const PoolEntry& e) const { return expected_value(e, cfg_.epsilon); }

    // Turns marginals into a concrete set of indices.
    std::vector<std::size_t> realize(std::uint32_t i, const std::vector<double>& p) {
        std::vector<std::size_t> certain;
        std::vector<std::size_t> uncertain;
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] >= 1.0) certain.push_back(k);
            else if (p[k] > 0.0) uncertain.push_back(k);
        }
        if (uncertain.empty()) return certain;
        // Systematic sampling over a random order keeps every marginal exact
        // while avoiding a fixed stride over the value ranking.
        RandomStream& rng = sampling_rng_[i];
        std::shuffle(uncertain.begin(), uncertain.end(), rng);
        std::vector<double> q(uncertain.size());
        for (std::size_t k = 0; k < uncertain.size(); ++k) q[k] = p[uncertain[k]];
        for (std::size_t k : systematic_sample(q, rng.uniform())) certain.push_back(uncertain[k]);
        return certain;
    }

    void release_if_done(std::size_t index) {
        if (pending_[index] == 0 && !cfg_.record_trace) {
            trace_.blocks[index].header.reset();
            trace_.blocks[index].body.reset();
        }
    }

    void on_header(const Event& ev) {
        BlockRecord& rec = trace_.blocks[ev.block];
        NodeState& node = nodes_[ev.actor];
        const Outcome out = node.on_receive_header(rec.header, ev.time);
        record(ev.time, EventKind::kHeaderRecv, ev.actor, rec.id,
               static_cast<std::uint32_t>(rec.header->signal.inserted_count()), static_cast<std::int64_t>(out));
        if (out == Outcome::kAccepted) {
            ++trace_.stats.headers_accepted;
            // Under the standard protocol the body arrives with the header.
            if (cfg_.protocol == ProtocolKind::kTips) push(*node.expiry(rec.id), EventType::kExpire, ev.actor, ev.block);
            if (ev.actor == 0 && rec.flags == kBlockDelaySignal) observe_signal(ev.time);
        } else if (out == Outcome::kRejectedFlood) {
            ++trace_.stats.headers_rejected_flood;
        }
        --pending_[ev.block];
        release_if_done(ev.block);
    }

    void on_body(const Event& ev) {
        BlockRecord& rec = trace_.blocks[ev.block];
        const Outcome out = nodes_[ev.actor].on_receive_body(rec.body, ev.time);
        record(ev.time, EventKind::kBodyRecv, ev.actor, rec.id, static_cast<std::uint32_t>(rec.body->tx_ids.size()),
               static_cast<std::int64_t>(out));
        if (out == Outcome::kRejectedInvalidBody) ++trace_.stats.bodies_invalid;
        --pending_[ev.block];
        release_if_done(ev.block);
    }

    void on_expire(const Event& ev) {
        const BlockRecord& rec = trace_.blocks[ev.block];
        const Outcome out = nodes_[ev.actor].on_header_expired(rec.id, ev.time);
        if (out == Outcome::kIgnored) return;
        ++trace_.stats.headers_expired;
        record(ev.time, EventKind::kHeaderExpire, ev.actor, rec.id, 0, static_cast<std::int64_t>(out));
        if (ev.actor == 0 && rec.flags == kBlockDelaySignal) observe_expiry(ev.time);
    }

    // Attack-only header: appended to the block table, delivered without body.
    // Its id comes from a separate range so honest ids do not depend on the
    // attacker.
    void broadcast_signal(double time, BloomFilter signal, std::uint32_t flags, RandomStream& delay_rng) {
        const BlockId id = next_attack_id_++;
        const std::size_t index = trace_.blocks.size();
        auto header = std::make_shared<const BlockHeader>(
            BlockHeader{id, attacker_id(), time, {kGenesisId}, std::move(signal), true});
        BlockRecord rec;
        rec.id = id;
        rec.miner = attacker_id();
        rec.mine_time = time;
        rec.flags = flags;
        rec.header = header;
        record(time, EventKind::kMine, attacker_id(), id, static_cast<std::uint32_t>(header->signal.inserted_count()),
               flags);
        trace_.blocks.push_back(std::move(rec));
        pending_.push_back(0);
        for (std::uint32_t j = 0; j < nodes_.size(); ++j) {
            push(time + sample_delay(delay_rng, cfg_.tau_mean, cfg_.tau_stddev), EventType::kHeaderRecv, j, index);
            ++pending_.back();
        }
    }

    void on_flood(const Event& ev) {
        const FloodPolicy& policy = *pcfg_.flood_policy;
        BloomFilter signal(cfg_.bloom_bits, cfg_.bloom_hashes);
        const auto target = static_cast<std::uint32_t>(std::ceil(policy.threshold()));
        while (signal.popcount() < target)
            signal.set_bit(static_cast<std::uint32_t>(flood_bits_rng_->below(cfg_.bloom_bits)));
        broadcast_signal(ev.time, std::move(signal), kBlockFloodSignal, *flood_delay_rng_);
        ++trace_.stats.flood_signals_sent;
        push(ev.time + flood_rng_->exponential(cfg_.flood->signals_per_second), EventType::kFlood, attacker_id(), 0);
    }

    // --- delay-of-service attacker -------------------------------------------

    void on_inject_target(const Event& ev) {
        const auto serial = deliver_new_tx(ev.time, cfg_.delay->target_fee, true);
        if (!serial) {
            // Every pool is full of better transactions; try again later.
            push(ev.time + cfg_.delay->episode_gap + 1.0, EventType::kInjectTarget, attacker_id(), 0);
            return;
        }
        DelayEpisode ep;
        ep.target_serial = *serial;
        ep.inject_time = ev.time;
        trace_.episodes.push_back(ep);
        target_live_ = true;
        armed_ = true;
        attacking_ = false;
    }

    void on_attack_mine(const Event& ev) {
        push(ev.time + attack_rng_->exponential(cfg_.lambda * cfg_.delay->alpha), EventType::kAttackMine,
             attacker_id(), 0);
        if (!target_live_) return;
        DelayEpisode& ep = trace_.episodes.back();
        bool send = false;
        if (armed_) {
            // The attacker mined the first block after the target appeared.
            armed_ = false;
            attacking_ = true;
            ep.attacked = true;
            send = true;
        } else if (attacking_ && ev.time < last_signal_time_ + cfg_.header_timeout) {
            send = true;
        } else {
            attacking_ = false;
        }
        if (!send) return;
        last_signal_time_ = ev.time;
        ++ep.signals;
        BloomFilter signal(cfg_.bloom_bits, cfg_.bloom_hashes);
        signal.insert(make_tx_id(cfg_.seed, ep.target_serial));
        broadcast_signal(ev.time, std::move(signal), kBlockDelaySignal, *attack_delay_rng_);
    }

    void note_honest_block(const BlockRecord& rec) {
        if (!target_live_) return;
        armed_ = false;
        DelayEpisode& ep = trace_.episodes.back();
        const bool mined =
            std::find(rec.tx_serials.begin(), rec.tx_serials.end(), ep.target_serial) != rec.tx_serials.end();
        if (mined) {
            ep.included_time = rec.mine_time;
        } else {
            const TxId target = make_tx_id(cfg_.seed, ep.target_serial);
            const bool pooled = std::any_of(nodes_.begin(), nodes_.end(),
                                            [&](const NodeState& node) { return node.find(target) != nullptr; });
            if (pooled) return;
            ep.evicted = true;
        }
        if (suppressed_now_) ep.suppressed_until = rec.mine_time;
        if (ep.attacked && !suppression_seen_) ep.suppressed_until = ep.suppressed_from = rec.mine_time;
        target_live_ = false;
        suppression_seen_ = false;
        suppressed_now_ = false;
        attacking_ = false;
        ++completed_episodes_;
        push(rec.mine_time + cfg_.delay->episode_gap, EventType::kInjectTarget, attacker_id(), 0);
    }

    void observe_signal(double time) {
        if (!target_live_ || !trace_.episodes.back().attacked) return;
        DelayEpisode& ep = trace_.episodes.back();
        if (!suppression_seen_) {
            suppression_seen_ = true;
            ep.suppressed_from = time;
        }
        suppressed_now_ = true;
    }

    void observe_expiry(double time) {
        if (!target_live_ || !suppressed_now_) return;
        DelayEpisode& ep = trace_.episodes.back();
        const PoolEntry* e = nodes_[0].find(make_tx_id(cfg_.seed, ep.target_serial));
        if (e && e->pending_signals.empty()) {
            ep.suppressed_until = time;
            suppressed_now_ = false;
        }
    }

    SimConfig cfg_;
    ProtocolConfig pcfg_;
    std::vector<NodeState> nodes_;
    std::vector<RandomStream> mining_rng_;
    std::vector<RandomStream> delay_rng_;
    std::vector<RandomStream> sampling_rng_;
    RandomStream tx_time_rng_;
    RandomStream fee_rng_;
    std::optional<RandomStream> flood_rng_, flood_delay_rng_, flood_bits_rng_;
    std::optional<RandomStream> attack_rng_, attack_delay_rng_;
    std::vector<EquilibriumCache> eq_cache_;
    double honest_rate_ = 0.0;
    double next_tx_time_ = 0.0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    BlockId next_block_id_ = 1;
    BlockId next_attack_id_ = kAttackBlockIdBase;
    std::vector<std::uint32_t> pending_;
    EventTrace trace_;

    bool target_live_ = false;
    bool armed_ = false;
    bool attacking_ = false;
    bool suppression_seen_ = false;
    bool suppressed_now_ = false;
    double last_signal_time_ = 0.0;
    std::size_t completed_episodes_ = 0;
};

} // namespace

EventTrace run_simulation(const SimConfig& config) {
    return Simulator(config).run();
}

std::vector<NodeState> replay_trace(const EventTrace& trace) {
    const SimConfig& c = trace.config;
    if (!c.record_trace) throw std::invalid_argument("trace was recorded without events");
    const ProtocolConfig pc = protocol_config(c);
    std::vector<NodeState> nodes;
    for (std::size_t i = 0; i < c.num_miners; ++i) nodes.emplace_back(pc);
    std::unordered_map<BlockId, const BlockRecord*> by_id;
    for (const auto& b : trace.blocks) by_id.emplace(b.id, &b);
    auto block = [&](std::uint64_t id) -> const BlockRecord& {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw std::runtime_error("trace references unknown block " + std::to_string(id));
        return *it->second;
    };
    auto check = [](Outcome got, const TraceRecord& r) {
        if (static_cast<std::int64_t>(got) != r.extra)
            throw std::runtime_error("replay diverged at t=" + std::to_string(r.time) + ": " + to_string(got) +
                                     " vs recorded " + to_string(static_cast<Outcome>(r.extra)));
    };
    for (const TraceRecord& r : trace.records) {
        switch (r.kind) {
        case EventKind::kTxArrival: {
            const TxRecord& t = trace.txs.at(r.block_id);
            const Transaction tx{make_tx_id(c.seed, r.block_id), t.fee, t.arrival, 500};
            for (auto& node : nodes)
                if (!node.would_drop(tx)) node.on_receive_transaction(tx);
            break;
        }
        case EventKind::kMine: {
            if (r.actor >= nodes.size() || c.own_block_delivery != OwnBlockDelivery::kImmediate) break;
            const BlockRecord& b = block(r.block_id);
            const auto mined = nodes[r.actor].on_mine_block(r.time, b.body->tx_ids, b.id, r.actor);
            if (!(mined.header->signal == b.header->signal))
                throw std::runtime_error("replay produced a different block " + std::to_string(b.id));
            break;
        }
        case EventKind::kHeaderRecv:
            check(nodes.at(r.actor).on_receive_header(block(r.block_id).header, r.time), r);
            break;
        case EventKind::kBodyRecv:
            check(nodes.at(r.actor).on_receive_body(block(r.block_id).body, r.time), r);
            break;
        case EventKind::kHeaderExpire:
            check(nodes.at(r.actor).on_header_expired(r.block_id, r.time), r);
            break;
        }
    }
    return nodes;
}

} // namespace tips
