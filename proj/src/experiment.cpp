// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/experiment.h"

#include <sodium.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tips {

std::string sha256_hex(const std::string& data) {
    static const int ready = sodium_init();
    if (ready < 0) throw std::runtime_error("libsodium failed to initialize");
    unsigned char digest[crypto_hash_sha256_BYTES];
    crypto_hash_sha256(digest, reinterpret_cast<const unsigned char*>(data.data()), data.size());
    char hex[2 * crypto_hash_sha256_BYTES + 1];
    sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
    return hex;
}

std::vector<std::string> expand_values(const std::string& value) {
    const auto first = value.find(':');
    if (first == std::string::npos) return split_list(value);
    const auto second = value.find(':', first + 1);
    if (second == std::string::npos) throw std::invalid_argument("range expects start:stop:step");
    auto number = [&](std::size_t from, std::size_t to) {
        std::string part = value.substr(from, to - from);
        part.erase(0, part.find_first_not_of(" \t"));
        part.erase(part.find_last_not_of(" \t") + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size() || !std::isfinite(v))
            throw std::invalid_argument("bad number '" + part + "' in range");
        return v;
    };
    const double start = number(0, first);
    const double stop = number(first + 1, second);
    const double step = number(second + 1, value.size());
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("range needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw std::invalid_argument("range has too many values");
    std::vector<std::string> out;
    char buf[32];
    for (std::size_t k = 0; k < count; ++k) {
        std::snprintf(buf, sizeof buf, "%.10g", start + static_cast<double>(k) * step);
        out.emplace_back(buf);
    }
    return out;
}

std::size_t ExperimentSpec::num_points() const {
    std::size_t total = 1;
    for (const auto& axis : sweep) total *= axis.values.size();
    return total;
}

std::vector<std::pair<std::string, std::string>> ExperimentSpec::point(std::size_t index) const {
    std::vector<std::pair<std::string, std::string>> out(sweep.size());
    for (std::size_t a = sweep.size(); a-- > 0;) {
        const auto& axis = sweep[a];
        out[a] = {axis.key, axis.values[index % axis.values.size()]};
        index /= axis.values.size();
    }
    return out;
}

SimConfig ExperimentSpec::run_config(std::size_t p, std::size_t repeat) const {
    SimConfig c = base;
    for (const auto& [key, value] : point(p)) set_config_field(c, key, value);
    c.seed = base_seed + static_cast<std::uint64_t>(p) * 10007u + repeat;
    return c.resolved();
}

ExperimentSpec parse_experiment(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    const ConfigFile file = ConfigFile::parse(in, source);
    ExperimentSpec spec;
    spec.hash = sha256_hex(text);

    std::vector<const ConfigEntry*> sim;
    std::vector<const ConfigEntry*> sweep;
    for (const auto& e : file.entries) {
        if (e.section.empty() || e.section == "sim" || e.section == "attacker") {
            sim.push_back(&e);
        } else if (e.section == "sweep") {
            sweep.push_back(&e);
        } else if (e.section == "run") {
            if (e.key == "repeats") {
                spec.repeats = parse_uint(file, e);
                if (spec.repeats == 0) file.fail(e, "repeats must be at least 1");
            } else if (e.key == "seed") {
                spec.base_seed = parse_uint(file, e);
            } else if (e.key == "warmup") {
                spec.warmup_fraction = parse_double(file, e);
                if (!(spec.warmup_fraction >= 0.0 && spec.warmup_fraction < 1.0))
                    file.fail(e, "warmup must be in [0, 1)");
            } else if (e.key == "output") {
                spec.output = e.value;
            } else {
                file.fail(e, "unknown key '" + e.key + "' in [run]");
            }
        } else {
            file.fail(e, "unknown section [" + e.section + "]");
        }
    }
    spec.base = apply_config(SimConfig{}, file, sim);
    if (sweep.empty()) (void)resolve_entries(spec.base, file, sim);

    for (const ConfigEntry* e : sweep) {
        SweepAxis axis{e->key, {}};
        try {
            axis.values = expand_values(e->value);
        } catch (const std::invalid_argument& err) {
            file.fail(*e, err.what());
        }
        if (axis.values.empty()) file.fail(*e, "sweep over '" + e->key + "' has no values");
        for (const auto& v : axis.values) {
            SimConfig probe = spec.base;
            try {
                if (!set_config_field(probe, e->key, v)) file.fail(*e, "cannot sweep unknown field '" + e->key + "'");
                (void)probe.resolved();
            } catch (const InvalidSimConfig& err) {
                const auto& f = err.fields();
                if (std::find(f.begin(), f.end(), e->key) == f.end()) (void)resolve_entries(probe, file, sim);
                file.fail(*e, "value '" + v + "': " + err.what());
            } catch (const std::invalid_argument& err) {
                file.fail(*e, "value '" + v + "': " + err.what());
            }
        }
        spec.sweep.push_back(std::move(axis));
    }

    // Every combination must be valid, not only each value on its own.
    for (std::size_t p = 0; p < spec.num_points(); ++p) {
        try {
            (void)spec.run_config(p, 0);
        } catch (const std::invalid_argument& err) {
            std::string where;
            for (const auto& [k, v] : spec.point(p)) where += " " + k + "=" + v;
            throw ConfigError(source, sweep.empty() ? 0 : sweep.front()->line,
                              std::string("invalid sweep point") + where + ": " + err.what());
        }
    }
    return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment(text.str(), path);
}

std::size_t worker_count(std::size_t jobs) {
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TIPS_SIM_THREADS")) {
        std::size_t cap = 0;
        const std::string s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc() && ptr == s.data() + s.size() && cap > 0) workers = cap;
    }
    return std::max<std::size_t>(1, std::min(workers, jobs));
}

std::vector<RunSummary> run_experiment(const ExperimentSpec& spec, std::size_t threads) {
    const std::size_t jobs = spec.num_points() * spec.repeats;
    std::vector<RunSummary> rows(jobs);
    MetricsOptions options;
    options.warmup_fraction = spec.warmup_fraction;

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t job; (job = next.fetch_add(1)) < jobs;) {
            try {
                const SimConfig c = spec.run_config(job / spec.repeats, job % spec.repeats);
                rows[job] = summarize(run_simulation(c), options);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = jobs;
            }
        }
    };
    const std::size_t count = threads ? std::min(threads, std::max<std::size_t>(jobs, 1)) : worker_count(jobs);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < count; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

void write_experiment_csv(std::ostream& out, const ExperimentSpec& spec, const std::vector<RunSummary>& rows) {
    out << "# spec-hash: " << spec.hash << '\n';
    write_summary_header(out);
    for (const auto& r : rows) write_summary_row(out, r);
}

} // namespace tips
