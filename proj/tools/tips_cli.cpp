// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

// tips: experiment runner and closed-form calculator.
//
//   tips run SPEC [--output FILE] [--threads N]
//   tips simulate CONFIG [--trace FILE]
//   tips analytics FORMULA [--param value ...]
//   tips validate [--tolerance REL] [--only a,b] [--none] [--list]
//   tips equilibrium --n N --lambda L --delay D (--m M | --fees LIST | --fees @FILE)
//
// Exit codes: 0 ok, 1 validation failure, 2 usage or input error.

#include "tips/analytics.h"
#include "tips/bloom.h"
#include "tips/experiment.h"
#include "tips/metrics.h"
#include "tips/simengine.h"
#include "tips/strategies.h"
#include "tips/validation.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void print_value(double v) {
    std::printf("%.9g\n", v);
}

// "uniform" (an evenly spaced grid over (0, 1) of size m), "a,b,c", or
// "@path" with one fee per line. Sorted descending.
std::vector<double> load_fees(const std::string& spec, std::size_t m) {
    std::vector<double> fees;
    if (spec.empty() || spec == "uniform") {
        if (m == 0) throw UsageError("uniform fees need --m");
        for (std::size_t i = 0; i < m; ++i) fees.push_back(1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(m));
    } else {
        std::string text = spec;
        if (spec.front() == '@') {
            std::ifstream in(spec.substr(1));
            if (!in) throw UsageError("cannot open fee file '" + spec.substr(1) + "'");
            std::ostringstream all;
            for (std::string line; std::getline(in, line);)
                if (!line.empty()) all << line << ',';
            text = all.str();
            if (!text.empty()) text.pop_back();
        }
        for (const auto& item : tips::split_list(text)) {
            try {
                std::size_t used = 0;
                fees.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw UsageError("bad fee '" + item + "'");
            }
        }
    }
    if (fees.empty()) throw UsageError("empty fee list");
    std::sort(fees.begin(), fees.end(), std::greater<>());
    return fees;
}

tips::InclusionStrategy named_strategy(const std::string& name, const std::vector<double>& fees, std::size_t n,
                                       double lambda, double delay) {
    switch (tips::parse_strategy(name)) {
    case tips::StrategyKind::kRandom: return tips::strategy_random(fees.size(), n);
    case tips::StrategyKind::kPriority: return tips::strategy_priority(fees, n);
    case tips::StrategyKind::kTopN: return tips::strategy_top_n(fees, n);
    case tips::StrategyKind::kEquilibrium: return tips::equilibrium_strategy(fees, n, lambda, delay).strategy;
    }
    return {};
}

// Named numeric parameters of `analytics`, given as --key value pairs.
class Params {
public:
    explicit Params(const std::vector<std::string>& args) {
        for (std::size_t i = 0; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (a.rfind("--", 0) != 0) throw UsageError("expected --name value, got '" + a + "'");
            const auto eq = a.find('=');
            if (eq != std::string::npos) {
                values_[a.substr(2, eq - 2)] = a.substr(eq + 1);
            } else {
                if (i + 1 >= args.size()) throw UsageError("missing value for '" + a + "'");
                values_[a.substr(2)] = args[++i];
            }
        }
    }
    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        used_.push_back(key);
        const auto it = values_.find(key);
        if (it != values_.end()) return it->second;
        if (fallback) return *fallback;
        throw UsageError("missing parameter --" + key);
    }
    double num(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const auto it = values_.find(key);
        used_.push_back(key);
        if (it == values_.end()) {
            if (fallback) return *fallback;
            throw UsageError("missing parameter --" + key);
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw UsageError("--" + key + " expects a number, got '" + it->second + "'");
        }
    }
    std::size_t count(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const double v = num(key, fallback);
        if (v < 0.0 || v != std::floor(v)) throw UsageError("--" + key + " expects a non-negative integer");
        return static_cast<std::size_t>(v);
    }
    void finish() const {
        for (const auto& [k, v] : values_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end()) throw UsageError("unknown parameter --" + k);
    }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> used_;
};

using Formula = std::function<double(Params&)>;

const std::map<std::string, std::pair<std::string, Formula>>& formulas() {
    static const std::map<std::string, std::pair<std::string, Formula>> table = {
        {"bloom-fpr", {"--b --h --n", [](Params& p) {
             return tips::bf_false_positive_rate(static_cast<std::uint32_t>(p.count("b")),
                                                 static_cast<std::uint32_t>(p.count("h")), p.count("n"));
         }}},
        {"bloom-popcount", {"--b --h --n", [](Params& p) {
             return tips::bf_expected_popcount(static_cast<std::uint32_t>(p.count("b")),
                                               static_cast<std::uint32_t>(p.count("h")), p.count("n"));
         }}},
        {"flood-threshold", {"--b --h --n [--eta 1e-4]", [](Params& p) {
             return tips::bf_flood_threshold(static_cast<std::uint32_t>(p.count("b")),
                                             static_cast<std::uint32_t>(p.count("h")), p.count("n"), p.num("eta", 1e-4));
         }}},
        {"reward", {"--p --lambda --delay", [](Params& p) {
             return tips::reward_coefficient(p.num("p"), p.num("lambda"), p.num("delay"));
         }}},
        {"utilization", {"--strategy --lambda --delay --n --m [--fees]", [](Params& p) {
             const std::size_t n = p.count("n");
             const auto fees = load_fees(p.text("fees", "uniform"), p.count("m", 0));
             const double lambda = p.num("lambda");
             const double delay = p.num("delay");
             return tips::utilization(named_strategy(p.text("strategy"), fees, n, lambda, delay), n, lambda, delay);
         }}},
        {"throughput", {"--strategy --lambda --delay --n --m [--fees]", [](Params& p) {
             const std::size_t n = p.count("n");
             const auto fees = load_fees(p.text("fees", "uniform"), p.count("m", 0));
             const double lambda = p.num("lambda");
             const double delay = p.num("delay");
             return tips::throughput(named_strategy(p.text("strategy"), fees, n, lambda, delay), n, lambda, delay);
         }}},
        {"fsr", {"--strategy --lambda --delay --n --m [--fees]", [](Params& p) {
             const std::size_t n = p.count("n");
             const auto fees = load_fees(p.text("fees", "uniform"), p.count("m", 0));
             const double lambda = p.num("lambda");
             const double delay = p.num("delay");
             return tips::fee_service_rate(named_strategy(p.text("strategy"), fees, n, lambda, delay), fees, lambda,
                                           delay);
         }}},
        {"xi", {"--lambda --delay --n --m [--fees]", [](Params& p) {
             const auto fees = load_fees(p.text("fees", "uniform"), p.count("m", 0));
             return tips::random_gap_xi(fees, p.count("n"), p.num("lambda"), p.num("delay"));
         }}},
        {"eta", {"--lambda --tau --n --m [--fees]", [](Params& p) {
             const auto fees = load_fees(p.text("fees", "uniform"), p.count("m", 0));
             return tips::topn_gap_eta(fees, p.count("n"), p.num("lambda"), p.num("tau"));
         }}},
        {"topn-threshold", {"--fn --fn1 --lambda", [](Params& p) {
             return tips::topn_uniqueness_threshold(p.num("fn"), p.num("fn1"), p.num("lambda"));
         }}},
        {"efficiency-bound", {"--lambda --tau --n --m", [](Params& p) {
             return tips::efficiency_lower_bound(p.num("lambda"), p.num("tau"), p.count("n"), p.count("m"));
         }}},
        {"efficiency-bound-alt", {"--lambda --tau", [](Params& p) {
             return tips::efficiency_lower_bound_alt(p.num("lambda"), p.num("tau"));
         }}},
        {"limit-tps", {"--marginal-delay", [](Params& p) { return tips::limit_tps(p.num("marginal-delay")); }}},
        {"limit-tps-ratio", {"--tx-size-bits --bits-per-tx", [](Params& p) {
             return tips::limit_tps_ratio(p.num("tx-size-bits"), p.num("bits-per-tx"));
         }}},
        {"delay-attack", {"--alpha --lambda --T", [](Params& p) {
             return tips::delay_attack_expectation(p.num("alpha"), p.num("lambda"), p.num("T"));
         }}},
    };
    return table;
}

int cmd_analytics(const std::string& name, const std::vector<std::string>& args) {
    const auto& table = formulas();
    const auto it = table.find(name);
    if (it == table.end()) {
        std::string known;
        for (const auto& [k, v] : table) known += " " + k;
        throw UsageError("unknown formula '" + name + "'; known:" + known);
    }
    Params params(args);
    const double value = it->second.second(params);
    params.finish();
    print_value(value);
    return kOk;
}

int cmd_run(const std::string& path, const std::string& output, std::size_t threads) {
    const tips::ExperimentSpec spec = tips::load_experiment(path);
    const auto rows = tips::run_experiment(spec, threads);
    const std::string target = output.empty() ? spec.output : output;
    if (target.empty() || target == "-") {
        tips::write_experiment_csv(std::cout, spec, rows);
    } else {
        std::ofstream out(target, std::ios::binary);
        if (!out) throw UsageError("cannot write '" + target + "'");
        tips::write_experiment_csv(out, spec, rows);
        std::cerr << "wrote " << rows.size() << " rows to " << target << '\n';
    }
    return kOk;
}

int cmd_simulate(const std::string& path, const std::string& trace_path) {
    tips::SimConfig config = tips::parse_sim_config(tips::ConfigFile::load(path));
    config.record_trace = !trace_path.empty();
    const auto trace = tips::run_simulation(config);
    if (!trace_path.empty()) {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) throw UsageError("cannot write '" + trace_path + "'");
        trace.write_csv(out);
    }
    tips::write_summary_header(std::cout);
    tips::write_summary_row(std::cout, tips::summarize(trace));
    return kOk;
}

int cmd_validate(double tolerance, const std::vector<std::string>& only, bool none, std::uint64_t seed, bool list) {
    if (list) {
        for (const auto& name : tips::validation_check_names()) std::cout << name << '\n';
        return kOk;
    }
    tips::ValidationOptions options;
    options.relative_tolerance = tolerance;
    options.only = only;
    options.empty = none;
    options.seed = seed;
    std::size_t failed = 0;
    std::size_t total = 0;
    tips::run_validation(options, [&](const tips::CheckResult& r) {
        tips::print_check(std::cout, r);
        std::cout.flush();
        failed += !r.passed;
        ++total;
    });
    std::cout << total - failed << '/' << total << " checks passed\n";
    return failed ? kFailed : kOk;
}

int cmd_equilibrium(std::size_t n, double lambda, double delay, std::size_t m, const std::string& fee_spec) {
    const auto fees = load_fees(fee_spec, m);
    const auto eq = tips::equilibrium_strategy(fees, n, lambda, delay);
    std::printf("index,fee,p\n");
    for (std::size_t i = 0; i < fees.size(); ++i) std::printf("%zu,%.9g,%.9g\n", i, fees[i], eq.strategy[i]);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TIPS transaction inclusion simulator and calculator", "tips"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment spec and write one summary row per run");
    std::string spec_path;
    std::string output;
    std::size_t threads = 0;
    run->add_option("spec", spec_path, "Experiment spec file")->required();
    run->add_option("-o,--output", output, "Output CSV (overrides the spec; '-' for stdout)");
    run->add_option("-j,--threads", threads, "Worker threads (default: TIPS_SIM_THREADS or all cores)");

    auto* simulate = app.add_subcommand("simulate", "Run one configuration and print its summary");
    std::string config_path;
    std::string trace_path;
    simulate->add_option("config", config_path, "Simulation config file")->required();
    simulate->add_option("--trace", trace_path, "Write the event trace CSV here");

    auto* analytics = app.add_subcommand("analytics", "Evaluate a closed-form expression");
    std::string formula;
    analytics->add_option("formula", formula, "Formula name, followed by --name value pairs")->required();
    analytics->prefix_command();
    analytics->footer([] {
        std::string text = "Formulas:\n";
        for (const auto& [name, entry] : formulas()) text += "  " + name + "  " + entry.first + "\n";
        return text;
    }());

    auto* validate = app.add_subcommand("validate", "Cross-check closed forms against simulation");
    double tolerance = 0.0;
    std::vector<std::string> only;
    bool none = false;
    bool list = false;
    std::uint64_t seed = 1;
    validate->add_option("--tolerance", tolerance, "Replace every tolerance by this relative value");
    validate->add_option("--only", only, "Run only these checks")->delimiter(',');
    validate->add_flag("--none", none, "Run no checks");
    validate->add_flag("--list", list, "List check names");
    validate->add_option("--seed", seed, "Master seed");

    auto* equilibrium = app.add_subcommand("equilibrium", "Print the symmetric equilibrium strategy as CSV");
    std::size_t n = 0;
    std::size_t m = 0;
    double lambda = 0.0;
    double delay = 0.0;
    std::string fee_spec;
    equilibrium->add_option("--n", n, "Block size")->required();
    equilibrium->add_option("--lambda", lambda, "Block rate")->required();
    equilibrium->add_option("--delay", delay, "Effective delay")->required();
    equilibrium->add_option("--m", m, "Pool size for uniform fees");
    equilibrium->add_option("--fees", fee_spec, "uniform, a comma list, or @file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) return cmd_run(spec_path, output, threads);
        if (*simulate) return cmd_simulate(config_path, trace_path);
        if (*analytics) return cmd_analytics(formula, analytics->remaining());
        if (*validate) return cmd_validate(tolerance, only, none, seed, list);
        if (*equilibrium) return cmd_equilibrium(n, lambda, delay, m, fee_spec);
    } catch (const UsageError& e) {
        std::cerr << "tips: " << e.what() << '\n';
        return kUsage;
    } catch (const tips::ConfigError& e) {
        std::cerr << "tips: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "tips: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "tips: error: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}
