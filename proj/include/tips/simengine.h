// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include "tips/config.h"
#include "tips/protocol.h"

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tips {

enum class ProtocolKind { kStandard, kTips };
enum class StrategyKind { kRandom, kPriority, kTopN, kEquilibrium };
enum class FeeDistribution { kUniform, kCustom };
/// kNetwork: a miner learns of its own block through the same sampled delays
/// as its peers. kImmediate: it removes the chosen transactions at once.
enum class OwnBlockDelivery { kNetwork, kImmediate };

const char* to_string(ProtocolKind kind) noexcept;
const char* to_string(StrategyKind kind) noexcept;
ProtocolKind parse_protocol(const std::string& name);
StrategyKind parse_strategy(const std::string& name);

struct FloodAttackConfig {
    double signals_per_second = 10.0;
};

/// An attacker with power alpha that suppresses target transactions by
/// broadcasting signals without bodies, renewing them while it keeps mining
/// within T of its previous signal.
struct DelayAttackConfig {
    double alpha = 0.25;
    double target_fee = 2.0;
    /// Pause between the inclusion of one target and the injection of the next.
    double episode_gap = 1.0;
    /// Stop once this many episodes have completed (0: run to the horizon).
    std::size_t stop_after_episodes = 0;
};

struct SimConfig {
    std::size_t num_miners = 10;
    ProtocolKind protocol = ProtocolKind::kTips;
    StrategyKind strategy = StrategyKind::kTopN;
    double lambda = 0.5;
    double delta_mean = 10.0;
    double delta_stddev = -1.0; // negative: 10% of the mean
    double tau_mean = 0.1;
    double tau_stddev = -1.0;
    double tx_rate = 1250.0;
    FeeDistribution fee_dist = FeeDistribution::kUniform;
    std::vector<double> fee_values;
    std::size_t n = 2000;
    std::size_t m = 10000;
    std::uint32_t bloom_bits = 0; // 0: 8 n
    std::uint32_t bloom_hashes = 5;
    double epsilon = 0.0;        // 0: filter false-positive rate at (b, h, n)
    double header_timeout = 0.0; // 0: 3 delta_mean
    double flood_eta = 1e-4;     // 0 disables the flood check
    double horizon = 4000.0;
    std::uint64_t seed = 1;
    std::size_t initial_pool = SIZE_MAX; // SIZE_MAX: m
    OwnBlockDelivery own_block_delivery = OwnBlockDelivery::kNetwork;
    bool record_trace = false;
    std::optional<FloodAttackConfig> flood;
    std::optional<DelayAttackConfig> delay;

    /// Fills in the derived defaults and checks every invariant. Throws
    /// InvalidSimConfig naming the offending fields.
    SimConfig resolved() const;

    double effective_delay() const noexcept { return protocol == ProtocolKind::kTips ? tau_mean : delta_mean; }
};

class InvalidSimConfig : public std::invalid_argument {
public:
    InvalidSimConfig(std::vector<std::string> fields, const std::string& message)
        : std::invalid_argument(message), fields_(std::move(fields)) {}
    /// Config keys that can fix the violation.
    const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    std::vector<std::string> fields_;
};

SimConfig attach_flood_attacker(SimConfig config, double signals_per_second);
SimConfig attach_delay_attacker(SimConfig config, double alpha, double target_fee);

/// Applies the entries of one section (field names as in SimConfig, plus an
/// [attacker] section) on top of `base`. Unknown keys are errors.
SimConfig apply_config(SimConfig base, const ConfigFile& file, const std::vector<const ConfigEntry*>& entries);
SimConfig parse_sim_config(const ConfigFile& file);
/// resolved(), with a failure reported at the last entry that set one of the
/// offending fields (line 0 when none did).
SimConfig resolve_entries(const SimConfig& config, const ConfigFile& file,
                          const std::vector<const ConfigEntry*>& entries);
/// Sets one field by name; returns false if the key is unknown.
bool set_config_field(SimConfig& config, const std::string& key, const std::string& value);

enum class EventKind : std::uint8_t { kTxArrival, kMine, kHeaderRecv, kBodyRecv, kHeaderExpire };
const char* to_string(EventKind kind) noexcept;

inline constexpr std::uint32_t kWorldActor = 0xffffffffu;
/// Attack-only headers take ids from this value upward.
inline constexpr BlockId kAttackBlockIdBase = BlockId{1} << 48;

/// One trace line. For kTxArrival block_id holds the transaction serial. For
/// receive and expiry events extra holds the Outcome; for kMine it holds the
/// block flags.
struct TraceRecord {
    double time = 0.0;
    EventKind kind = EventKind::kTxArrival;
    std::uint32_t actor = 0;
    std::uint64_t block_id = 0;
    std::uint32_t tx_count = 0;
    std::int64_t extra = 0;
};

struct TxRecord {
    double fee = 0.0;
    double arrival = 0.0;
    bool target = false;
};

enum BlockFlags : std::uint32_t { kBlockHonest = 0, kBlockDelaySignal = 1, kBlockFloodSignal = 2 };

struct BlockRecord {
    BlockId id = 0;
    std::uint32_t miner = 0;
    double mine_time = 0.0;
    std::uint32_t flags = kBlockHonest;
    std::vector<std::uint64_t> tx_serials;
    /// Expected revenue R(p | p) of the strategy used, with the protocol's
    /// effective delay.
    double predicted_revenue = 0.0;
    HeaderPtr header; // kept only with record_trace
    BodyPtr body;
};

struct DelayEpisode {
    std::uint64_t target_serial = 0;
    double inject_time = 0.0;
    bool attacked = false;
    /// Observed at honest node 0: first receipt of an attack signal on the
    /// target, and the expiry that restored its fee for good.
    double suppressed_from = 0.0;
    double suppressed_until = 0.0;
    double included_time = -1.0;
    /// The target left every pool without being mined.
    bool evicted = false;
    std::size_t signals = 0;

    double suppression() const noexcept { return attacked ? suppressed_until - suppressed_from : 0.0; }
};

struct SimStats {
    std::uint64_t tx_generated = 0;
    std::uint64_t tx_dropped_everywhere = 0;
    std::uint64_t equilibrium_solves = 0;
    std::uint64_t equilibrium_fallbacks = 0;
    std::uint64_t headers_rejected_flood = 0;
    std::uint64_t headers_accepted = 0;
    std::uint64_t headers_expired = 0;
    std::uint64_t bodies_invalid = 0;
    std::uint64_t flood_signals_sent = 0;
};

/// Output of one run. Blocks, honest and attack-only, are stored in mining
/// order.
struct EventTrace {
    SimConfig config; // resolved
    std::vector<TraceRecord> records; // only with record_trace
    std::vector<TxRecord> txs;        // indexed by serial
    std::vector<BlockRecord> blocks;
    std::vector<DelayEpisode> episodes;
    SimStats stats;
    double end_time = 0.0;
    std::vector<NodeSnapshot> final_states; // only with record_trace

    /// Writes records as CSV: time,kind,actor,block_id,tx_count,extra.
    void write_csv(std::ostream& out) const;
};

/// Transaction id of a serial: 8-byte big-endian serial followed by 24 bytes
/// derived from the seed.
TxId make_tx_id(std::uint64_t seed, std::uint64_t serial);
std::uint64_t tx_serial(const TxId& id);

EventTrace run_simulation(const SimConfig& config);

/// Re-applies a recorded trace to fresh node states. Throws std::runtime_error
/// if an event's outcome differs from the recorded one.
std::vector<NodeState> replay_trace(const EventTrace& trace);

ProtocolConfig protocol_config(const SimConfig& resolved);

} // namespace tips
