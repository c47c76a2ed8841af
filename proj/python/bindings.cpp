#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "casim/runner.hpp"

namespace py = pybind11;
using namespace casim;

namespace {

PolicyKind policy_arg(const std::string& name) {
  auto p = policy_from_string(name);
  if (!p) throw std::invalid_argument("unknown policy '" + name + "'");
  return *p;
}

py::dict row_to_dict(const ResultRow& row) {
  const CounterSet& c = row.result.counters;
  py::dict d;
  d["policy"] = std::string(to_string(row.policy));
  d["swept_value"] = row.swept_value ? py::cast(*row.swept_value) : py::none();
  d["replication"] = row.replication;
  d["P_b"] = row.result.p_block();
  d["P_f"] = row.result.p_forced();
  d["P_a"] = row.result.p_access();
  d["capacity"] = row.result.capacity();
  d["mean_queue_len"] = row.result.mean_queue_len();
  d["arrivals"] = c.su_arrivals;
  d["blocked"] = c.su_blocked;
  d["admitted"] = c.su_admitted;
  d["dropped"] = c.su_forced_terminated;
  d["completed"] = c.su_completed;
  d["in_system"] = c.in_system();
  d["pu_arrivals"] = c.pu_arrivals;
  d["pu_blocked"] = c.pu_blocked;
  d["trace_hash"] = row.result.trace_hash;
  d["decision_hash"] = row.result.decision_hash;
  return d;
}

py::list rows_to_list(const std::vector<ResultRow>& rows) {
  py::list out;
  for (const ResultRow& r : rows) out.append(row_to_dict(r));
  return out;
}

Scenario with_overrides(Scenario sc, std::optional<std::uint64_t> seed,
                        std::optional<int> replications) {
  if (seed) sc.sim.seed = *seed;
  if (replications) sc.sim.replications = *replications;
  return sc;
}

}  // namespace

PYBIND11_MODULE(casim, m) {
  m.doc() = "Discrete-event simulator for cognitive-radio channel-aggregation "
            "policies (IBS, RBS and their buffered variants) with an exact "
            "small-chain validation oracle.";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<UnsupportedScenario>(m, "UnsupportedScenario",
                                              PyExc_ValueError);

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("channels",
                             [](const Scenario& sc) { return sc.spectrum.channels; })
      .def_property_readonly("slots_per_channel",
                             [](const Scenario& sc) { return sc.spectrum.slots(); })
      .def_property_readonly("policy",
                             [](const Scenario& sc) {
                               return std::string(to_string(sc.policy.policy));
                             })
      .def_property_readonly("replications",
                             [](const Scenario& sc) { return sc.sim.replications; })
      .def_property_readonly("seed", [](const Scenario& sc) { return sc.sim.seed; })
      .def_property_readonly("horizon",
                             [](const Scenario& sc) { return sc.sim.horizon; })
      .def("__repr__", [](const Scenario& sc) {
        std::ostringstream os;
        os << "<Scenario " << sc.spectrum.channels << "x" << sc.spectrum.slots()
           << " slots, " << to_string(sc.policy.policy) << ", "
           << sc.traffic.num_classes() << " class(es)>";
        return os.str();
      });

  m.def("load_scenario", &parse_scenario, py::arg("text"),
        "Parse a scenario from key=value text or its JSON equivalent.");
  m.def("load_scenario_file", &load_scenario_file, py::arg("path"));
  m.def("apply_param", &apply_param, py::arg("scenario"), py::arg("path"),
        py::arg("value"), "Set a sweepable field, e.g. traffic.pu_arrival_rate.");
  m.def("sweepable_params", [] { return sweepable_params(); });

  m.def("frame_slots",
        [](double message_bits, double channel_constant, double symbol_rate,
           double bits_per_symbol) {
          return compute_frame_slots({message_bits, channel_constant, symbol_rate},
                                     {1, bits_per_symbol, 0.0, 1e9});
        },
        py::arg("message_bits"), py::arg("channel_constant"), py::arg("symbol_rate"),
        py::arg("bits_per_symbol") = 1.0,
        "Slots per frame; the rate argument cancels and only shapes the check.");

  m.def("channel_utilization",
        [](double off_to_on, double on_to_off) {
          return channel_utilization({0, off_to_on, on_to_off, false});
        },
        py::arg("off_to_on"), py::arg("on_to_off"));

  m.def("pu_slot_capacity",
        [](int channels, int slots_per_channel, std::vector<double> off_to_on,
           std::vector<double> on_to_off) {
          if (off_to_on.size() != on_to_off.size())
            throw std::invalid_argument("need matching off_to_on/on_to_off lists");
          SpectrumPool pool(channels, slots_per_channel);
          std::vector<PuChannelProcess> procs;
          for (std::size_t i = 0; i < off_to_on.size(); ++i)
            procs.push_back({static_cast<int>(i), off_to_on[i], on_to_off[i], false});
          return pu_slot_capacity(pool, procs);
        },
        py::arg("channels"), py::arg("slots_per_channel"), py::arg("off_to_on"),
        py::arg("on_to_off"));

  m.def("su_slot_capacity",
        [](int channels, int slots_per_channel, double pu_capacity) {
          SpectrumPool pool(channels, slots_per_channel);
          return su_slot_capacity(pool, pu_capacity);
        },
        py::arg("channels"), py::arg("slots_per_channel"), py::arg("pu_capacity"));

  m.def("snr_to_mode",
        [](double gamma_db, std::vector<std::tuple<int, double, double, double>> table)
            -> std::optional<int> {
          std::vector<AmcMode> modes;
          for (const auto& [index, rate, low, high] : table)
            modes.push_back({index, rate, low, high});
          auto mode = snr_to_mode(gamma_db, modes);
          if (!mode) return std::nullopt;
          return mode->index;
        },
        py::arg("gamma_db"), py::arg("table"),
        "Mode index for an SNR sample, or None below the lowest threshold.");

  m.def("run",
        [](const Scenario& scenario, std::optional<std::string> policy,
           std::optional<std::uint64_t> seed, std::optional<int> replications,
           int threads) {
          Scenario sc = with_overrides(scenario, seed, replications);
          PolicyKind kind = policy ? policy_arg(*policy) : sc.policy.policy;
          return rows_to_list(
              run_replications(sc, kind, sc.sim.seed, sc.sim.replications, threads));
        },
        py::arg("scenario"), py::arg("policy") = py::none(),
        py::arg("seed") = py::none(), py::arg("replications") = py::none(),
        py::arg("threads") = 0,
        "Run the scenario; one dict per replication.");

  m.def("sweep",
        [](const Scenario& scenario, const std::string& param,
           std::vector<double> values, std::vector<std::string> policies,
           std::optional<std::uint64_t> seed, std::optional<int> replications,
           int threads) {
          Scenario sc = with_overrides(scenario, seed, replications);
          std::vector<PolicyKind> kinds;
          for (const auto& name : policies) kinds.push_back(policy_arg(name));
          if (kinds.empty()) kinds.push_back(sc.policy.policy);
          return rows_to_list(run_sweep(sc, param, values, kinds, sc.sim.seed,
                                        sc.sim.replications, threads));
        },
        py::arg("scenario"), py::arg("param"), py::arg("values"),
        py::arg("policies") = std::vector<std::string>{},
        py::arg("seed") = py::none(), py::arg("replications") = py::none(),
        py::arg("threads") = 0,
        "One dict per (value, policy, replication) cell, common random numbers.");

  m.def("validate",
        [](const Scenario& scenario, std::optional<std::uint64_t> seed,
           std::optional<int> replications, int threads) {
          Scenario sc = with_overrides(scenario, seed, replications);
          ValidationReport report = validate_against_oracle(
              sc, sc.policy.policy, sc.sim.seed, sc.sim.replications, threads);
          py::dict out;
          out["states"] = report.states;
          out["all_pass"] = report.all_pass;
          py::list rows;
          for (const ValidateRow& r : report.rows) {
            py::dict d;
            d["metric"] = r.metric;
            d["simulated"] = r.simulated;
            d["ci95_half"] = r.ci95_half;
            d["exact"] = r.exact;
            d["abs_diff"] = r.abs_diff;
            d["pass"] = r.pass;
            rows.append(d);
          }
          out["rows"] = rows;
          return out;
        },
        py::arg("scenario"), py::arg("seed") = py::none(),
        py::arg("replications") = py::none(), py::arg("threads") = 0,
        "Compare the simulator against the exact chain on a restricted scenario.");

  m.def("exact_metrics",
        [](const Scenario& scenario, std::optional<std::string> policy) {
          PolicyKind kind = policy ? policy_arg(*policy) : scenario.policy.policy;
          CtmcModel model = build_generator(scenario, kind);
          Eigen::VectorXd pi = solve_steady_state(model.generator);
          OracleMetrics om = oracle_metrics(pi, model, scenario);
          py::dict d;
          d["states"] = static_cast<int>(model.states.size());
          d["P_b"] = om.p_block;
          d["P_f"] = om.p_forced;
          d["capacity"] = om.capacity;
          d["mean_queue_len"] = om.mean_queue_len;
          return d;
        },
        py::arg("scenario"), py::arg("policy") = py::none(),
        "Steady-state metrics from the exact chain (restricted family only).");

  m.attr("__version__") = "0.1.0";
}
