#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "casim/runner.hpp"
#include "casim/simulation.hpp"

using namespace casim;

namespace {

Scenario base_scenario() {
  Scenario sc;
  sc.spectrum.channels = 2;
  sc.spectrum.frame = {2, 1, 1};  // S = 2
  sc.traffic.pu_arrival_rate = 0.3;
  sc.traffic.pu_service_rate = 0.6;
  sc.traffic.su_arrival_rate = {1.0, 0.7};
  sc.traffic.su_service_rate = {1.0, 0.9};
  DemandRule r0{1, 1, 2};
  DemandRule r1{2, 1, 2};
  sc.traffic.demand = {{r0, r0, r1}, {r1, r1, r1}};
  sc.policy.policy = PolicyKind::RbsQ;
  sc.policy.queue1_capacity = 2;
  sc.policy.queue2_capacity = 2;
  sc.policy.deadline = 4.0;
  sc.sim.horizon = 800;
  sc.sim.warmup = 80;
  sc.sim.seed = 21;
  validate_scenario(sc);
  return sc;
}

Scenario mm1_scenario(double arrival, int queue_cap) {
  Scenario sc;
  sc.spectrum.channels = 1;
  sc.traffic.su_arrival_rate = {arrival};
  sc.traffic.su_service_rate = {1.0};
  DemandRule unit{1, 1, 1};
  sc.traffic.demand = {{unit, unit, unit}};
  sc.policy.policy = queue_cap > 0 ? PolicyKind::IbsQ : PolicyKind::Ibs;
  sc.policy.queue1_capacity = queue_cap;
  sc.sim.horizon = 20000;
  sc.sim.warmup = 500;
  sc.sim.seed = 5;
  validate_scenario(sc);
  return sc;
}

}  // namespace

TEST_CASE("identical seeds replay the identical run") {
  Scenario sc = base_scenario();
  for (PolicyKind p :
       {PolicyKind::Ibs, PolicyKind::Rbs, PolicyKind::IbsQ, PolicyKind::RbsQ}) {
    RunResult a = Simulator(sc, p, 123).run();
    RunResult b = Simulator(sc, p, 123).run();
    CHECK(a.trace_hash == b.trace_hash);
    CHECK(a.decision_hash == b.decision_hash);
    CHECK(a.counters.su_arrivals == b.counters.su_arrivals);
    CHECK(a.counters.su_completed == b.counters.su_completed);
    RunResult c = Simulator(sc, p, 124).run();
    CHECK(a.trace_hash != c.trace_hash);
  }
}

TEST_CASE("a zero horizon processes nothing") {
  Scenario sc = base_scenario();
  sc.sim.horizon = 0;
  sc.sim.warmup = 0;
  RunResult r = Simulator(sc, PolicyKind::IbsQ, 1).run();
  CHECK(r.counters.su_arrivals == 0);
  CHECK(r.counters.su_admitted == 0);
  CHECK(r.counters.observation_time == 0.0);
}

TEST_CASE("arrival counts follow the poisson law") {
  Scenario sc = mm1_scenario(1.0, 0);
  sc.sim.horizon = 100000;
  sc.sim.warmup = 0;
  RunResult r = Simulator(sc, PolicyKind::Ibs, 77).run();
  double n = 100000.0;
  CHECK(std::abs(double(r.counters.su_arrivals) - n) < 3.0 * std::sqrt(n));
}

TEST_CASE("counting partitions and slot conservation hold under every policy") {
  Scenario sc = base_scenario();
  SimOptions opts;
  opts.audit_every_event = true;  // throws inside run() on any violation
  for (PolicyKind p :
       {PolicyKind::Ibs, PolicyKind::Rbs, PolicyKind::IbsQ, PolicyKind::RbsQ}) {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      RunResult r = Simulator(sc, p, seed, opts).run();
      CHECK(r.partition_ok());
      CHECK(r.counters.su_admitted >=
            r.counters.su_completed + r.counters.su_forced_terminated);
      CHECK(r.queue_audit.enqueued ==
            r.queue_audit.served + r.queue_audit.dropped + r.residual_queued);
      CHECK(r.counters.in_system() == r.residual_counted);
    }
  }
}

TEST_CASE("strict head-of-line and contiguous placement keep the invariants") {
  Scenario sc = base_scenario();
  sc.policy.strict_hol = true;
  SimOptions opts;
  opts.audit_every_event = true;
  RunResult r = Simulator(sc, PolicyKind::IbsQ, 4, opts).run();
  CHECK(r.partition_ok());

  sc.policy.strict_hol = false;
  sc.policy.contiguous = true;
  RunResult r2 = Simulator(sc, PolicyKind::RbsQ, 4, opts).run();
  CHECK(r2.partition_ok());
}

TEST_CASE("snr drift keeps the system consistent and touches queued demands") {
  Scenario sc = base_scenario();
  sc.traffic.snr_rate = 0.5;
  SimOptions opts;
  opts.audit_every_event = true;
  RunResult r = Simulator(sc, PolicyKind::RbsQ, 11, opts).run();
  CHECK(r.partition_ok());
  CHECK(r.queue_audit.enqueued ==
        r.queue_audit.served + r.queue_audit.dropped + r.residual_queued);
}

TEST_CASE("warm-up arrivals shape state but not counters") {
  Scenario sc = base_scenario();
  sc.sim.horizon = 100;
  sc.sim.warmup = 100;
  RunResult r = Simulator(sc, PolicyKind::IbsQ, 9).run();
  CHECK(r.counters.su_arrivals == 0);
  CHECK(r.counters.su_completed == 0);
  CHECK(r.counters.observation_time == 0.0);

  sc.sim.warmup = 0;
  RunResult full = Simulator(sc, PolicyKind::IbsQ, 9).run();
  sc.sim.warmup = 50;
  RunResult half = Simulator(sc, PolicyKind::IbsQ, 9).run();
  CHECK(half.counters.su_arrivals < full.counters.su_arrivals);
  CHECK(half.trace_hash != full.trace_hash);  // the measure tick is an event
  CHECK(half.partition_ok());
}

TEST_CASE("loss-free throughput equals the arrival rate") {
  // 16 slots, unit demand, offered load 2: blocking is negligible, so the
  // completion rate must flow-balance the arrivals.
  Scenario sc;
  sc.spectrum.channels = 4;
  sc.spectrum.frame = {4, 1, 1};
  sc.traffic.su_arrival_rate = {2.0};
  sc.traffic.su_service_rate = {1.0};
  DemandRule unit{1, 1, 1};
  sc.traffic.demand = {{unit, unit, unit}};
  sc.policy.policy = PolicyKind::Ibs;
  sc.sim.horizon = 20000;
  sc.sim.warmup = 500;
  sc.sim.replications = 5;
  validate_scenario(sc);
  std::vector<ResultRow> rows = run_replications(sc, PolicyKind::Ibs, 5, 5);
  std::vector<double> caps;
  for (const auto& row : rows) {
    CHECK(row.result.counters.su_blocked == 0);
    caps.push_back(row.result.capacity());
  }
  ReplicationSummary s = summarize(caps);
  CHECK(std::abs(s.mean - 2.0) < std::max(0.02, 3 * s.ci95_half));
}

TEST_CASE("the buffered single-server emulation matches the birth-death queue") {
  // One channel, one slot, arrival 0.5, service 1, huge buffer: the mean
  // buffered count must approach rho^2 / (1 - rho) = 0.5.
  Scenario sc = mm1_scenario(0.5, 100000);
  sc.policy.deadline = std::numeric_limits<double>::infinity();
  sc.sim.horizon = 40000;
  sc.sim.warmup = 2000;
  sc.sim.replications = 5;
  std::vector<ResultRow> rows = run_replications(sc, PolicyKind::IbsQ, 13, 5);
  std::vector<double> lq;
  for (const auto& row : rows) lq.push_back(row.result.mean_queue_len());
  ReplicationSummary s = summarize(lq);
  CHECK(std::abs(s.mean - 0.5) < std::max(0.03, 3 * s.ci95_half));
}

TEST_CASE("degenerate demand with no buffer collapses the policy family") {
  // theta == theta_min == theta_max and queue 0: all four policies must make
  // literally the same decisions on the same draws.
  Scenario sc = base_scenario();
  sc.policy.queue1_capacity = 0;
  sc.policy.queue2_capacity = 0;
  DemandRule r0{1, 1, 1};
  DemandRule r1{2, 2, 2};
  sc.traffic.demand = {{r0, r0, r0}, {r1, r1, r1}};
  SimOptions opts;
  opts.record_decisions = true;
  RunResult ibs = Simulator(sc, PolicyKind::Ibs, 31, opts).run();
  RunResult rbs = Simulator(sc, PolicyKind::Rbs, 31, opts).run();
  CHECK(ibs.decision_hash == rbs.decision_hash);
  CHECK(ibs.trace_hash == rbs.trace_hash);
  REQUIRE(ibs.decisions.size() == rbs.decisions.size());
  CHECK(ibs.decisions == rbs.decisions);

  // the same collapse holds for the buffered variants
  sc.policy.queue1_capacity = 2;
  sc.policy.queue2_capacity = 2;
  sc.policy.deadline = 4.0;
  RunResult ibsq = Simulator(sc, PolicyKind::IbsQ, 31, opts).run();
  RunResult rbsq = Simulator(sc, PolicyKind::RbsQ, 31, opts).run();
  CHECK(ibsq.decisions == rbsq.decisions);
}

TEST_CASE("queue size zero makes +q behave exactly like the baseline") {
  Scenario sc = base_scenario();
  sc.policy.queue1_capacity = 0;
  sc.policy.queue2_capacity = 0;
  SimOptions opts;
  opts.record_decisions = true;
  RunResult baseline = Simulator(sc, PolicyKind::Ibs, 8, opts).run();
  RunResult queued = Simulator(sc, PolicyKind::IbsQ, 8, opts).run();
  CHECK(baseline.decisions == queued.decisions);
  CHECK(baseline.counters.su_blocked == queued.counters.su_blocked);
  CHECK(baseline.counters.su_forced_terminated ==
        queued.counters.su_forced_terminated);
}

TEST_CASE("pu arrivals on a saturated spectrum are counted as pu-blocked") {
  Scenario sc = mm1_scenario(0.1, 0);
  sc.traffic.pu_arrival_rate = 5.0;
  sc.traffic.pu_service_rate = 0.4;
  sc.sim.horizon = 2000;
  sc.sim.warmup = 0;
  RunResult r = Simulator(sc, PolicyKind::Ibs, 3).run();
  CHECK(r.counters.pu_blocked > 0);
  CHECK(r.counters.pu_arrivals > r.counters.pu_blocked);
  CHECK(r.partition_ok());
}

TEST_CASE("replications differ by seed and merge in order") {
  Scenario sc = base_scenario();
  std::vector<ResultRow> rows = run_replications(sc, PolicyKind::IbsQ, 100, 4, 2);
  REQUIRE(rows.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(rows[k].replication == k);
  CHECK(rows[0].result.trace_hash != rows[1].result.trace_hash);
  // rerunning yields the identical ordered rows regardless of threading
  std::vector<ResultRow> again = run_replications(sc, PolicyKind::IbsQ, 100, 4, 4);
  for (int k = 0; k < 4; ++k)
    CHECK(rows[k].result.trace_hash == again[k].result.trace_hash);
}

TEST_CASE("a one-value sweep is the plain run") {
  Scenario sc = base_scenario();
  std::vector<ResultRow> swept = run_sweep(sc, "traffic.pu_arrival_rate",
                                           {sc.traffic.pu_arrival_rate},
                                           {PolicyKind::IbsQ}, 50, 3);
  std::vector<ResultRow> plain = run_replications(sc, PolicyKind::IbsQ, 50, 3);
  REQUIRE(swept.size() == plain.size());
  for (std::size_t i = 0; i < swept.size(); ++i)
    CHECK(swept[i].result.trace_hash == plain[i].result.trace_hash);
}

TEST_CASE("csv emission follows the documented schema") {
  Scenario sc = base_scenario();
  std::vector<ResultRow> rows = run_replications(sc, PolicyKind::IbsQ, 50, 1);
  std::ostringstream raw, summary;
  write_raw_csv(raw, rows);
  write_summary_csv(summary, rows);

  std::string raw_str = raw.str();
  CHECK(raw_str.rfind("policy,swept_value,replication,P_b,P_f,P_a,capacity,"
                      "mean_queue_len,arrivals,blocked,admitted,dropped,"
                      "completed,in_system\n", 0) == 0);
  CHECK(std::count(raw_str.begin(), raw_str.end(), '\n') == 2);  // header + 1 row
  CHECK(raw_str.find("\r") == std::string::npos);  // LF only

  // single replication: value column filled, CI columns empty
  std::string sum_str = summary.str();
  CHECK(sum_str.find(",P_b,") != std::string::npos);
  CHECK(sum_str.find(",,,1\n") != std::string::npos);
}

TEST_CASE("the simulator tracks the exact chain on a rich preemption config") {
  // Three whole-channel SUs, a shared buffer and exponential deadlines:
  // preemption, relocation, drain and expiry all active in both paths.
  Scenario sc;
  sc.spectrum.channels = 3;
  sc.spectrum.frame = {2, 1, 1};  // S = 2
  sc.traffic.pu_arrival_rate = 0.5;
  sc.traffic.pu_service_rate = 0.8;
  sc.traffic.su_arrival_rate = {1.4};
  sc.traffic.su_service_rate = {0.6};
  DemandRule whole{2, 2, 2};
  sc.traffic.demand = {{whole, whole, whole}};
  sc.policy.policy = PolicyKind::RbsQ;
  sc.policy.queue1_capacity = 1;
  sc.policy.queue2_capacity = 1;
  sc.policy.deadline = 3.0;
  sc.policy.exp_deadline = true;
  sc.sim.horizon = 30000;
  sc.sim.warmup = 500;
  sc.sim.replications = 6;
  sc.sim.seed = 29;
  validate_scenario(sc);

  ValidationReport report =
      validate_against_oracle(sc, PolicyKind::RbsQ, sc.sim.seed, sc.sim.replications);
  CHECK(report.states > 5);
  for (const ValidateRow& row : report.rows) {
    INFO(row.metric, ": simulated ", row.simulated, " exact ", row.exact);
    CHECK(row.pass);
  }
}

TEST_CASE("common random numbers align arrival processes across policies") {
  Scenario sc = base_scenario();
  RunResult a = Simulator(sc, PolicyKind::IbsQ, 55).run();
  RunResult b = Simulator(sc, PolicyKind::RbsQ, 55).run();
  // the arrival streams are policy-independent
  CHECK(a.counters.su_arrivals == b.counters.su_arrivals);
  CHECK(a.counters.pu_arrivals == b.counters.pu_arrivals);
}
