#include "tips/analytics.h"
#include "tips/metrics.h"
#include "tips/strategies.h"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace tips;

namespace {

// Two miners, four transactions, three blocks; tx 1 mined twice.
EventTrace hand_trace() {
    EventTrace t;
    t.config.num_miners = 2;
    t.config.n = 2;
    t.config.m = 10;
    t.config = t.config.resolved();
    t.end_time = 100.0;
    t.txs = {{0.9, 12.0, false}, {0.5, 15.0, false}, {0.2, 20.0, false}, {0.05, 30.0, false}, {0.7, 1.0, false}};
    auto block = [](BlockId id, std::uint32_t miner, double time, std::vector<std::uint64_t> serials) {
        BlockRecord b;
        b.id = id;
        b.miner = miner;
        b.mine_time = time;
        b.tx_serials = std::move(serials);
        b.predicted_revenue = 1.0;
        return b;
    };
    t.blocks.push_back(block(1, 0, 5.0, {4}));   // warm-up, excluded
    t.blocks.push_back(block(2, 0, 40.0, {0, 1}));
    t.blocks.push_back(block(3, 1, 41.0, {1, 2}));
    BlockRecord attack = block(kAttackBlockIdBase, 2, 42.0, {});
    attack.flags = kBlockDelaySignal;
    t.blocks.push_back(attack);
    t.blocks.push_back(block(4, 1, 60.0, {2}));
    return t;
}

} // namespace

TEST_CASE("hand-built trace") {
    const EventTrace t = hand_trace();
    const RunSummary s = summarize(t);
    CHECK(s.window_start == doctest::Approx(10.0));
    CHECK(s.blocks == 3);
    CHECK(s.inclusions == 5);
    CHECK(s.unique_inclusions == 3);
    CHECK(s.utilization == doctest::Approx(0.6));
    CHECK(s.duplicate_rate == doctest::Approx(0.4));
    CHECK(s.tps == doctest::Approx(3.0 / 90.0));
    CHECK(s.total_revenue == doctest::Approx(0.9 + 0.5 + 0.2));
    CHECK(s.revenue_per_block == doctest::Approx(1.6 / 3.0));
    REQUIRE(s.revenue_per_miner.size() == 2);
    CHECK(s.revenue_per_miner[0] == doctest::Approx(1.4));
    CHECK(s.revenue_per_miner[1] == doctest::Approx(0.2 / 2.0));
    // Tx 1 reappears 1 s after its first inclusion (not yet signalled with
    // lag 5); tx 2 reappears 19 s later.
    MetricsOptions opt;
    opt.signal_lag = 5.0;
    CHECK(summarize(t, opt).post_signal_duplicate_rate == doctest::Approx(0.2));
    opt.signal_lag = 0.5;
    CHECK(summarize(t, opt).post_signal_duplicate_rate == doctest::Approx(0.4));

    const auto& c = s.confirmation;
    CHECK(c.confirmed[9] == 1);
    CHECK(c.mean[9] == doctest::Approx(28.0));
    CHECK(c.mean[5] == doctest::Approx(25.0));
    CHECK(c.mean[2] == doctest::Approx(21.0));
    CHECK(c.censored[0] == 1);
    CHECK(std::isnan(c.mean[1]));
    CHECK(c.overall_mean == doctest::Approx((28.0 + 25.0 + 21.0) / 3.0));

    MetricsOptions none;
    none.warmup_fraction = 0.0;
    CHECK(summarize(t, none).unique_inclusions == 4);
    none.warmup_fraction = 1.0;
    CHECK_THROWS_AS(summarize(t, none), std::invalid_argument);
}

TEST_CASE("empty traces") {
    EventTrace t;
    t.config = SimConfig{}.resolved();
    t.end_time = 10.0;
    CHECK(measure_tps(t) == 0.0);
    CHECK_THROWS_AS(measure_utilization(t), EmptyTraceError);
    CHECK(summarize(t).revenue_per_block == 0.0);
}

TEST_CASE("anova matches reference values") {
    CHECK(anova_p_value({{1, 2, 3}, {4, 5, 6}}) == doctest::Approx(0.02131164112875672).epsilon(1e-9));
    CHECK(anova_p_value({{1, 2, 3, 4.5}, {4, 5, 6}, {0.5, 9, 2.25}}) ==
          doctest::Approx(0.5272998776416585).epsilon(1e-9));
    CHECK(anova_p_value({{1, 2, 3}}) == 1.0);
    CHECK(anova_p_value({{1, 2, 3}, {}}) == 1.0);
    CHECK(anova_p_value({{1, 1}, {1, 1}}) == 1.0);
}

TEST_CASE("summary CSV row") {
    const RunSummary s = summarize(hand_trace());
    std::ostringstream out;
    write_summary_header(out);
    write_summary_row(out, s);
    const std::string text = out.str();
    const std::string header = text.substr(0, text.find('\n'));
    CHECK(header ==
          "seed,protocol,strategy,lambda,delta_mean,tau_mean,n,m,epsilon,utilization,tps,revenue,fsr,dup_rate,"
          "ct_d1,ct_d2,ct_d3,ct_d4,ct_d5,ct_d6,ct_d7,ct_d8,ct_d9,ct_d10");
    const std::string row = text.substr(header.size() + 1);
    CHECK(std::count(row.begin(), row.end(), ',') == 23);
    CHECK(row.rfind("1,tips,topn,0.5,10,0.1,2,10,", 0) == 0);
}

TEST_CASE("single miner: full utilization and revenue equals the fees mined") {
    SimConfig c;
    c.num_miners = 1;
    c.protocol = ProtocolKind::kStandard;
    c.own_block_delivery = OwnBlockDelivery::kImmediate;
    c.n = 50;
    c.m = 500;
    c.tx_rate = 100.0;
    c.horizon = 400.0;
    const auto t = run_simulation(c);
    const RunSummary s = summarize(t);
    CHECK(s.utilization == 1.0);
    double mined = 0.0;
    for (const auto& b : t.blocks)
        if (b.mine_time >= s.window_start)
            for (auto serial : b.tx_serials) mined += t.txs[serial].fee;
    CHECK(s.total_revenue == doctest::Approx(mined).epsilon(1e-12));
    CHECK(s.revenue_per_miner[0] == doctest::Approx(s.revenue_per_block).epsilon(1e-12));
}

TEST_CASE("trace identities hold exactly") {
    for (auto protocol : {ProtocolKind::kStandard, ProtocolKind::kTips}) {
        SimConfig c;
        c.protocol = protocol;
        c.num_miners = 5;
        c.n = 40;
        c.m = 200;
        c.delta_mean = 4.0;
        c.tau_mean = 0.1;
        c.tx_rate = 60.0;
        c.horizon = 600.0;
        const auto t = run_simulation(c);
        const RunSummary s = summarize(t);
        REQUIRE(s.blocks > 50);
        CHECK(s.tps == doctest::Approx(s.block_rate * s.mean_block_fill * s.utilization).epsilon(1e-12));
        CHECK(s.mean_block_fill == doctest::Approx(static_cast<double>(c.n)));
        CHECK(s.fsr == doctest::Approx(s.block_rate * s.revenue_per_block).epsilon(1e-12));
        // Conservation: miner totals add up to the unique fees.
        std::vector<std::size_t> counts(c.num_miners, 0);
        for (const auto& b : t.blocks)
            if (b.flags == kBlockHonest && b.mine_time >= s.window_start) ++counts[b.miner];
        double sum = 0.0;
        for (std::size_t i = 0; i < c.num_miners; ++i) sum += s.revenue_per_miner[i] * static_cast<double>(counts[i]);
        CHECK(sum == doctest::Approx(s.total_revenue).epsilon(1e-12));
    }
}

TEST_CASE("standard top-n utilization follows the renewal closed form") {
    SimConfig c;
    c.protocol = ProtocolKind::kStandard;
    c.num_miners = 10;
    c.n = 100;
    c.m = 500;
    c.lambda = 0.5;
    c.delta_mean = 10.0;
    c.tx_rate = 80.0;
    c.horizon = 8000.0;
    const auto t = run_simulation(c);
    const RunSummary s = summarize(t);
    const double predicted = utilization(strategy_top_n(std::vector<double>(c.m, 1.0), c.n), c.n, c.lambda,
                                         c.delta_mean);
    CHECK(s.utilization == doctest::Approx(predicted).epsilon(0.1));
}

TEST_CASE("confirmation time by fee decile") {
    SimConfig c;
    c.protocol = ProtocolKind::kTips;
    c.num_miners = 5;
    c.n = 40;
    c.m = 400;
    c.tx_rate = 17.0;
    c.horizon = 3000.0;
    const auto topn = summarize(run_simulation(c));
    // Top deciles all wait for the next block, so equal means are allowed up
    // to three standard errors of the difference.
    auto variance_of_mean = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size());
    };
    for (std::size_t k = 1; k < 10; ++k) {
        const auto& c = topn.confirmation;
        const double se = std::sqrt(variance_of_mean(c.samples[k]) + variance_of_mean(c.samples[k - 1]));
        CHECK(c.mean[k] <= c.mean[k - 1] + 3.0 * se);
    }
    CHECK(topn.confirmation.mean[9] < topn.confirmation.mean[0]);

    c.strategy = StrategyKind::kRandom;
    c.tx_rate = 12.0;
    const auto rand = summarize(run_simulation(c));
    CHECK(anova_p_value(rand.confirmation.samples) > 0.01);

    // Custom fee levels: deciles follow the observed quantiles.
    c.fee_dist = FeeDistribution::kCustom;
    c.fee_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto custom = measure_confirmation_time(run_simulation(c));
    for (std::size_t k = 0; k < 9; ++k) CHECK(custom.bounds[k] == doctest::Approx(static_cast<double>(k + 2)));
}

TEST_CASE("duplicates after a signal stay within epsilon") {
    for (auto strategy : {StrategyKind::kTopN, StrategyKind::kEquilibrium}) {
        SimConfig c;
        c.protocol = ProtocolKind::kTips;
        c.strategy = strategy;
        c.num_miners = 10;
        c.n = 50;
        c.m = 250;
        c.lambda = 0.5;
        c.delta_mean = 10.0;
        c.tx_rate = 200.0;
        c.horizon = 1000.0;
        const auto tips_run = summarize(run_simulation(c));
        const double eps = tips_run.epsilon;
        const double sigma = std::sqrt(eps * (1.0 - eps) / static_cast<double>(tips_run.inclusions));
        CHECK(tips_run.post_signal_duplicate_rate <= eps + 3.0 * sigma);

        c.protocol = ProtocolKind::kStandard;
        const auto std_run = summarize(run_simulation(c));
        CHECK(std_run.duplicate_rate > tips_run.duplicate_rate);
    }
}
