// Python bindings for the TIPS core.

#include "tips/analytics.h"
#include "tips/bloom.h"
#include "tips/experiment.h"
#include "tips/metrics.h"
#include "tips/simengine.h"
#include "tips/strategies.h"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace tips;

namespace {

TxId to_id(const py::bytes& raw) {
    const std::string s = raw;
    if (s.size() != 32) throw py::value_error("transaction ids are 32 bytes");
    TxId id{};
    std::copy(s.begin(), s.end(), id.begin());
    return id;
}

SimConfig make_config(const py::dict& fields) {
    SimConfig c;
    for (const auto& [key, value] : fields) {
        const std::string k = py::str(key);
        std::string v;
        if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
            for (const auto& item : value) v += (v.empty() ? "" : ",") + std::string(py::str(item));
        } else if (py::isinstance<py::bool_>(value)) {
            v = value.cast<bool>() ? "true" : "false";
        } else {
            v = py::str(value);
        }
        if (!set_config_field(c, k, v)) throw py::key_error("unknown config field '" + k + "'");
    }
    return c.resolved();
}

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["seed"] = s.seed;
    d["protocol"] = to_string(s.protocol);
    d["strategy"] = to_string(s.strategy);
    d["lambda"] = s.lambda;
    d["n"] = s.n;
    d["m"] = s.m;
    d["epsilon"] = s.epsilon;
    d["blocks"] = s.blocks;
    d["inclusions"] = s.inclusions;
    d["unique_inclusions"] = s.unique_inclusions;
    d["block_rate"] = s.block_rate;
    d["utilization"] = s.utilization;
    d["tps"] = s.tps;
    d["duplicate_rate"] = s.duplicate_rate;
    d["post_signal_duplicate_rate"] = s.post_signal_duplicate_rate;
    d["total_revenue"] = s.total_revenue;
    d["revenue_per_block"] = s.revenue_per_block;
    d["predicted_revenue_per_block"] = s.predicted_revenue_per_block;
    d["fsr"] = s.fsr;
    d["revenue_per_miner"] = s.revenue_per_miner;
    d["confirmation_by_decile"] = std::vector<double>(s.confirmation.mean.begin(), s.confirmation.mean.end());
    d["confirmation_mean"] = s.confirmation.overall_mean;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Transaction inclusion with signaling: Bloom signals, strategies and a DAG mining simulator.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<BloomFilter>(m, "BloomFilter")
        .def(py::init<std::uint32_t, std::uint32_t>(), py::arg("bits"), py::arg("num_hashes"))
        .def("insert", [](BloomFilter& f, const py::bytes& id) { f.insert(to_id(id)); })
        .def("__contains__", [](const BloomFilter& f, const py::bytes& id) { return f.contains(to_id(id)); })
        .def_property_readonly("bits", &BloomFilter::bit_count)
        .def_property_readonly("num_hashes", &BloomFilter::num_hashes)
        .def_property_readonly("inserted", &BloomFilter::inserted_count)
        .def("popcount", &BloomFilter::popcount)
        .def("serialize", [](const BloomFilter& f) {
            const auto raw = f.serialize();
            return py::bytes(reinterpret_cast<const char*>(raw.data()), raw.size());
        })
        .def_static("deserialize", [](const py::bytes& raw) {
            const std::string s = raw;
            return BloomFilter::deserialize(
                std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
        });

    m.def("bf_false_positive_rate", &bf_false_positive_rate, py::arg("bits"), py::arg("num_hashes"),
          py::arg("inserted"));
    m.def("bf_flood_threshold", &bf_flood_threshold, py::arg("bits"), py::arg("num_hashes"), py::arg("inserted"),
          py::arg("eta"));

    m.def("reward_coefficient", &reward_coefficient, py::arg("p"), py::arg("lambda_"), py::arg("delay"));
    m.def("expected_revenue",
          [](const std::vector<double>& p, const std::vector<double>& others, const std::vector<double>& fees,
             double lambda, double delay) { return expected_revenue(p, others, fees, lambda, delay); },
          py::arg("p"), py::arg("p_others"), py::arg("fees"), py::arg("lambda_"), py::arg("delay"));
    m.def("equilibrium_strategy",
          [](const std::vector<double>& fees, std::size_t n, double lambda, double delay) {
              return equilibrium_strategy(fees, n, lambda, delay).strategy;
          },
          py::arg("fees"), py::arg("n"), py::arg("lambda_"), py::arg("delay"),
          "Symmetric equilibrium inclusion probabilities; fees sorted descending.");
    m.def("strategy_top_n", [](const std::vector<double>& fees, std::size_t n) { return strategy_top_n(fees, n); },
          py::arg("fees"), py::arg("n"));
    m.def("utilization",
          [](const std::vector<double>& p, std::size_t n, double lambda, double delay) {
              return utilization(p, n, lambda, delay);
          },
          py::arg("p"), py::arg("n"), py::arg("lambda_"), py::arg("delay"));
    m.def("delay_attack_expectation", &delay_attack_expectation, py::arg("alpha"), py::arg("lambda_"),
          py::arg("header_timeout"));

    m.def("simulate",
          [](const py::dict& config) {
              const SimConfig c = make_config(config);
              RunSummary s;
              {
                  py::gil_scoped_release release;
                  s = summarize(run_simulation(c));
              }
              return summary_dict(s);
          },
          py::arg("config"), "Runs one seeded simulation; config keys match the spec-file keys.");

    m.def("run_experiment",
          [](const std::string& text) {
              const ExperimentSpec spec = parse_experiment(text, "<string>");
              std::vector<RunSummary> rows;
              {
                  py::gil_scoped_release release;
                  rows = run_experiment(spec);
              }
              std::ostringstream out;
              write_experiment_csv(out, spec, rows);
              return out.str();
          },
          py::arg("spec_text"), "Runs an experiment spec and returns the CSV text.");
}
