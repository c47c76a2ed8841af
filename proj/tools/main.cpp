#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "casim/runner.hpp"

namespace fs = std::filesystem;
using namespace casim;

namespace {

// Exit codes: 0 success, 1 runtime failure, 2 scenario/parse error,
// 3 validation comparison failed, 4 scenario outside the oracle family.
constexpr int kExitRuntime = 1;
constexpr int kExitScenario = 2;
constexpr int kExitValidation = 3;
constexpr int kExitUnsupported = 4;

struct CommonOpts {
  std::string scenario_path;
  std::string policy_list;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int reps = 0;
  int threads = 0;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("CASIM_OUT_DIR")) return env;
  return ".";
}

std::vector<PolicyKind> parse_policies(const std::string& list, PolicyKind fallback) {
  if (list.empty()) return {fallback};
  std::vector<PolicyKind> out;
  std::stringstream ss(list);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto p = policy_from_string(part);
    if (!p) throw std::invalid_argument("unknown policy '" + part + "'");
    out.push_back(*p);
  }
  return out;
}

Scenario load(const CommonOpts& opts) {
  Scenario sc = load_scenario_file(opts.scenario_path);
  if (opts.seed_set) sc.sim.seed = opts.seed;
  if (opts.reps > 0) sc.sim.replications = opts.reps;
  return sc;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

void emit_outputs(const CommonOpts& opts, const std::string& stem,
                  const std::vector<ResultRow>& rows) {
  fs::path dir = opts.out_dir.empty() ? default_out_dir() : opts.out_dir;
  fs::create_directories(dir);
  std::ostringstream raw, summary;
  write_raw_csv(raw, rows);
  write_summary_csv(summary, rows);
  write_file(dir / (stem + "_raw.csv"), raw.str());
  write_file(dir / (stem + "_summary.csv"), summary.str());
  std::cout << "wrote " << (dir / (stem + "_raw.csv")).string() << " and "
            << (dir / (stem + "_summary.csv")).string() << "\n";
}

void print_group_summary(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_summary_csv(os, rows);
  std::cout << os.str();
}

// Expected slot split from the per-channel busy/idle chains, when given.
void print_capacity_split(const Scenario& sc) {
  const auto& a = sc.spectrum.pu_off_to_on;
  const auto& c = sc.spectrum.pu_on_to_off;
  if (a.empty() || c.empty()) return;
  SpectrumPool pool(sc.spectrum.channels, sc.spectrum.slots());
  std::vector<PuChannelProcess> procs;
  for (int i = 0; i < sc.spectrum.channels; ++i)
    procs.push_back({i, a[a.size() == 1 ? 0 : i], c[c.size() == 1 ? 0 : i], false});
  double phi = pu_slot_capacity(pool, procs);
  std::printf("expected slot split: PU %.3f, SU %.3f of %d\n", phi,
              su_slot_capacity(pool, phi), pool.total_slots());
}

int cmd_run(const CommonOpts& opts) {
  Scenario sc = load(opts);
  print_capacity_split(sc);
  std::vector<PolicyKind> policies = parse_policies(opts.policy_list, sc.policy.policy);
  std::vector<ResultRow> all;
  for (PolicyKind policy : policies) {
    std::vector<ResultRow> rows =
        run_replications(sc, policy, sc.sim.seed, sc.sim.replications, opts.threads);
    std::cout << to_string(policy) << ": " << rows.size() << " replication(s), "
              << "trace_hash=" << std::hex << rows.front().result.trace_hash
              << std::dec << "\n";
    all.insert(all.end(), rows.begin(), rows.end());
  }
  print_group_summary(all);
  emit_outputs(opts, "run", all);
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& param,
              const std::string& values_list) {
  Scenario sc = load(opts);
  std::vector<double> values;
  std::stringstream ss(values_list);
  std::string part;
  while (std::getline(ss, part, ',')) values.push_back(std::stod(part));
  if (values.empty()) throw std::invalid_argument("--values must list at least one value");
  std::vector<PolicyKind> policies = parse_policies(opts.policy_list, sc.policy.policy);
  std::vector<ResultRow> rows = run_sweep(sc, param, values, policies, sc.sim.seed,
                                          sc.sim.replications, opts.threads);
  print_group_summary(rows);
  emit_outputs(opts, "sweep", rows);
  return 0;
}

int cmd_validate(const CommonOpts& opts) {
  Scenario sc = load(opts);
  PolicyKind policy = parse_policies(opts.policy_list, sc.policy.policy).front();
  ValidationReport report = validate_against_oracle(sc, policy, sc.sim.seed,
                                                    sc.sim.replications, opts.threads);
  std::printf("exact chain: %d states\n", report.states);
  std::printf("%-16s %12s %12s %12s %10s  %s\n", "metric", "simulated", "ci95_half",
              "exact", "|diff|", "result");
  for (const ValidateRow& row : report.rows) {
    std::printf("%-16s %12.6f %12.6f %12.6f %10.6f  %s\n", row.metric.c_str(),
                row.simulated, row.ci95_half, row.exact, row.abs_diff,
                row.pass ? "pass" : "FAIL");
  }
  if (!opts.out_dir.empty()) {
    fs::path dir = opts.out_dir;
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "metric,simulated,ci95_half,exact,abs_diff,pass\n";
    for (const ValidateRow& row : report.rows)
      csv << row.metric << ',' << row.simulated << ',' << row.ci95_half << ','
          << row.exact << ',' << row.abs_diff << ',' << (row.pass ? 1 : 0) << '\n';
    write_file(dir / "validate_report.csv", csv.str());
    std::cout << "wrote " << (dir / "validate_report.csv").string() << "\n";
  }
  return report.all_pass ? 0 : kExitValidation;
}

int cmd_selftest() {
  int failures = 0;
  auto check = [&](bool ok, const std::string& name) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  // Frame/capacity arithmetic on known values.
  check(compute_frame_slots({1000, 0.5, 500}, {1, 2.0, 0, 10}) == 4,
        "frame slot arithmetic");
  SpectrumPool pool(2, 4);
  PuChannelProcess procs[] = {{0, 0.5, 0.5, false}, {1, 0.25, 0.75, false}};
  double phi = pu_slot_capacity(pool, procs);
  check(std::abs(phi - 3.0) < 1e-12 &&
            std::abs(su_slot_capacity(pool, phi) - 5.0) < 1e-12,
        "capacity split identity");

  // Determinism and conservation on a small mixed scenario.
  Scenario sc;
  sc.spectrum.channels = 2;
  sc.spectrum.frame = {2, 1, 1};
  sc.traffic.pu_arrival_rate = 0.3;
  sc.traffic.su_arrival_rate = {1.0};
  sc.traffic.su_service_rate = {1.0};
  sc.traffic.demand = {{DemandRule{1, 1, 2}, DemandRule{1, 1, 2}, DemandRule{2, 1, 2}}};
  sc.policy.policy = PolicyKind::RbsQ;
  sc.policy.queue1_capacity = 2;
  sc.policy.queue2_capacity = 2;
  sc.policy.deadline = 5;
  sc.sim.horizon = 500;
  sc.sim.warmup = 50;
  sc.sim.seed = 9;
  validate_scenario(sc);
  SimOptions audit;
  audit.audit_every_event = true;
  RunResult a = Simulator(sc, PolicyKind::RbsQ, 9, audit).run();
  RunResult b = Simulator(sc, PolicyKind::RbsQ, 9, audit).run();
  check(a.trace_hash == b.trace_hash && a.decision_hash == b.decision_hash,
        "replay determinism");
  check(a.partition_ok(), "counting partition");
  check(a.queue_audit.enqueued ==
            a.queue_audit.served + a.queue_audit.dropped + a.residual_queued,
        "queue audit");

  // Small exact-chain agreement.
  Scenario mm11;
  mm11.spectrum.channels = 1;
  mm11.traffic.su_arrival_rate = {1.0};
  mm11.traffic.su_service_rate = {1.0};
  mm11.traffic.demand = {{DemandRule{1, 1, 1}, DemandRule{1, 1, 1}, DemandRule{1, 1, 1}}};
  mm11.sim.horizon = 20000;
  mm11.sim.warmup = 200;
  mm11.sim.replications = 4;
  mm11.sim.seed = 3;
  validate_scenario(mm11);
  ValidationReport rep = validate_against_oracle(mm11, PolicyKind::Ibs, 3, 4);
  check(rep.all_pass, "loss-system oracle agreement");

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cognitive-radio channel-aggregation policy simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string param, values;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", opts.scenario_path, "scenario file (text or JSON)")
        ->required();
    cmd->add_option("--seed", opts.seed, "override the scenario base seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--reps", opts.reps, "override the replication count");
    cmd->add_option("--threads", opts.threads, "worker threads (default: hardware)");
  };

  CLI::App* run = app.add_subcommand("run", "run one scenario and emit CSV");
  add_common(run);
  run->add_option("--policy", opts.policy_list, "policy override (comma list)");
  run->add_option("--out", opts.out_dir, "output directory (default $CASIM_OUT_DIR or .)");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep one parameter across values");
  add_common(sweep);
  sweep->add_option("--param", param, "swept field path, e.g. traffic.pu_arrival_rate")
      ->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--policy", opts.policy_list, "policies to compare (comma list)");
  sweep->add_option("--out", opts.out_dir, "output directory (default $CASIM_OUT_DIR or .)");

  CLI::App* validate = app.add_subcommand("validate", "compare against the exact chain");
  add_common(validate);
  validate->add_option("--policy", opts.policy_list, "policy override");
  validate->add_option("--out", opts.out_dir, "also write validate_report.csv here");

  app.add_subcommand("selftest", "quick built-in consistency battery");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opts);
    if (sweep->parsed()) return cmd_sweep(opts, param, values);
    if (validate->parsed()) return cmd_validate(opts);
    return cmd_selftest();
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitScenario;
  } catch (const UnsupportedScenario& e) {
    std::cerr << "outside the oracle family: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
