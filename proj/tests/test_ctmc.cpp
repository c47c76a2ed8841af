#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "casim/ctmc.hpp"

using namespace casim;

namespace {

// Independent closed form for the loss-system check: Erlang-B via the
// standard recurrence B_k = a B_{k-1} / (k + a B_{k-1}).
double erlang_b(int servers, double offered) {
  double b = 1.0;
  for (int k = 1; k <= servers; ++k) b = offered * b / (k + offered * b);
  return b;
}

Scenario small_scenario(int channels, int slots_bits, int theta, int queue_cap,
                        double su_arrival, double su_service, double pu_arrival = 0.0,
                        double pu_service = 1.0) {
  Scenario sc;
  sc.spectrum.channels = channels;
  sc.spectrum.frame = {double(slots_bits), 1.0, 1.0};  // S = slots_bits
  sc.traffic.pu_arrival_rate = pu_arrival;
  sc.traffic.pu_service_rate = pu_service;
  sc.traffic.su_arrival_rate = {su_arrival};
  sc.traffic.su_service_rate = {su_service};
  DemandRule rule{theta, theta, theta};
  sc.traffic.demand = {{rule, rule, rule}};
  sc.policy.policy = queue_cap > 0 ? PolicyKind::IbsQ : PolicyKind::Ibs;
  sc.policy.queue1_capacity = queue_cap;
  sc.sim.horizon = 1000;
  validate_scenario(sc);
  return sc;
}

}  // namespace

TEST_CASE("single-server loss system is a two-state chain") {
  Scenario sc = small_scenario(1, 1, 1, 0, 1.0, 1.0);
  CtmcModel model = build_generator(sc, PolicyKind::Ibs);
  CHECK(model.states.size() == 2);
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  CHECK(pi[model.index_of({0, 0, 0})] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pi[model.index_of({0, 1, 0})] == doctest::Approx(0.5).epsilon(1e-12));
  OracleMetrics om = oracle_metrics(pi, model, sc);
  CHECK(om.p_block == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(om.p_forced == 0.0);
  CHECK(om.capacity == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("adding one buffer slot gives the three-state chain") {
  Scenario sc = small_scenario(1, 1, 1, 1, 1.0, 1.0);
  CtmcModel model = build_generator(sc, PolicyKind::IbsQ);
  CHECK(model.states.size() == 3);
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  // rho = 1: the occupancy distribution is uniform
  for (int i = 0; i < 3; ++i) CHECK(pi[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  OracleMetrics om = oracle_metrics(pi, model, sc);
  CHECK(om.p_block == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("generator rows sum to zero") {
  Scenario sc = small_scenario(2, 2, 2, 3, 1.3, 0.7, 0.4, 0.9);
  CtmcModel model = build_generator(sc, PolicyKind::IbsQ);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.generator.rows());
  CHECK((model.generator * ones).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("preemption chain without a buffer has three reachable states") {
  Scenario sc = small_scenario(1, 1, 1, 0, 1.0, 1.0, 1.0, 1.0);
  CtmcModel model = build_generator(sc, PolicyKind::Ibs);
  CHECK(model.states.size() == 3);  // pu-on plus su-serving is unreachable
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  // balance by hand: pi = (1/3, 1/6, 1/2) over (empty, serving, pu)
  CHECK(pi[model.index_of({0, 0, 0})] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(pi[model.index_of({0, 1, 0})] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(pi[model.index_of({1, 0, 0})] == doctest::Approx(1.0 / 2).epsilon(1e-12));
  OracleMetrics om = oracle_metrics(pi, model, sc);
  CHECK(om.p_block == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(om.p_forced == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(om.capacity == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(om.mean_queue_len == 0.0);
}

TEST_CASE("preemption chain with one buffer slot has five reachable states") {
  Scenario sc = small_scenario(1, 1, 1, 1, 1.0, 1.0, 1.0, 1.0);
  CtmcModel model = build_generator(sc, PolicyKind::IbsQ);
  CHECK(model.states.size() == 5);
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  // hand-solved stationary vector: (4, 6, 3, 2, 11) / 26 over
  // (empty, serving, serving+queued, pu, pu+queued)
  CHECK(pi[model.index_of({0, 0, 0})] == doctest::Approx(4.0 / 26).epsilon(1e-12));
  CHECK(pi[model.index_of({0, 1, 0})] == doctest::Approx(6.0 / 26).epsilon(1e-12));
  CHECK(pi[model.index_of({0, 1, 1})] == doctest::Approx(3.0 / 26).epsilon(1e-12));
  CHECK(pi[model.index_of({1, 0, 0})] == doctest::Approx(2.0 / 26).epsilon(1e-12));
  CHECK(pi[model.index_of({1, 0, 1})] == doctest::Approx(11.0 / 26).epsilon(1e-12));
  OracleMetrics om = oracle_metrics(pi, model, sc);
  CHECK(om.p_block == doctest::Approx(7.0 / 13).epsilon(1e-12));
  CHECK(om.p_forced == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(om.capacity == doctest::Approx(9.0 / 26).epsilon(1e-12));
  CHECK(om.mean_queue_len == doctest::Approx(7.0 / 13).epsilon(1e-12));
}

TEST_CASE("loss systems match the erlang-b closed form") {
  struct Case {
    int channels, slot_bits, theta;
    double arrival, service;
  };
  for (const Case& c : {Case{3, 2, 2, 1.7, 0.6}, Case{1, 4, 1, 2.0, 1.0},
                        Case{2, 3, 3, 0.9, 0.5}, Case{4, 1, 1, 3.0, 0.8}}) {
    Scenario sc = small_scenario(c.channels, c.slot_bits, c.theta, 0, c.arrival, c.service);
    CtmcModel model = build_generator(sc, PolicyKind::Ibs);
    Eigen::VectorXd pi = solve_steady_state(model.generator);
    OracleMetrics om = oracle_metrics(pi, model, sc);
    int servers = (c.channels * c.slot_bits) / c.theta;
    double offered = c.arrival / (c.theta * c.service);
    CHECK(om.p_block == doctest::Approx(erlang_b(servers, offered)).epsilon(1e-9));
  }
}

TEST_CASE("exponential deadline expiry enters the chain") {
  Scenario sc = small_scenario(1, 1, 1, 1, 1.0, 1.0);
  sc.policy.deadline = 2.0;
  sc.policy.exp_deadline = true;
  CtmcModel model = build_generator(sc, PolicyKind::IbsQ);
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  OracleMetrics om = oracle_metrics(pi, model, sc);
  // birth-death by hand: pi = (3/8, 3/8, 1/4); drops only from the buffer
  CHECK(om.p_block == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(om.p_forced == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(om.capacity == doctest::Approx(5.0 / 8).epsilon(1e-12));
  CHECK(om.mean_queue_len == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("out-of-family scenarios are refused with a reason") {
  Scenario deterministic_deadline = small_scenario(1, 1, 1, 1, 1.0, 1.0);
  deterministic_deadline.policy.deadline = 2.0;
  CHECK_THROWS_AS(build_generator(deterministic_deadline, PolicyKind::IbsQ),
                  UnsupportedScenario);
  CHECK(!oracle_unsupported_reason(deterministic_deadline, PolicyKind::IbsQ).empty());

  Scenario two_classes = small_scenario(1, 1, 1, 0, 1.0, 1.0);
  two_classes.traffic.su_arrival_rate = {1.0, 1.0};
  two_classes.traffic.su_service_rate = {1.0, 1.0};
  two_classes.traffic.demand.push_back(two_classes.traffic.demand[0]);
  CHECK(!oracle_unsupported_reason(two_classes, PolicyKind::Ibs).empty());

  Scenario elastic = small_scenario(1, 2, 2, 0, 1.0, 1.0);
  elastic.traffic.demand[0][0].theta_min = 1;
  elastic.traffic.demand[0][1].theta_min = 1;
  elastic.traffic.demand[0][2].theta_min = 1;
  CHECK(!oracle_unsupported_reason(elastic, PolicyKind::Rbs).empty());

  // partial-channel SUs with a PU on several channels
  Scenario partial = small_scenario(2, 2, 1, 0, 1.0, 1.0, 0.5, 1.0);
  CHECK(!oracle_unsupported_reason(partial, PolicyKind::Ibs).empty());

  // whole-channel SUs with a PU are fine
  Scenario whole = small_scenario(2, 2, 2, 0, 1.0, 1.0, 0.5, 1.0);
  CHECK(oracle_unsupported_reason(whole, PolicyKind::Ibs).empty());
}

TEST_CASE("large chains take the iterative path and still match the closed form") {
  // 2300 single-slot channels, no PU, no buffer: a loss system with more
  // than 2000 states, solved by uniformized power iteration.
  const int servers = 2300;
  Scenario sc = small_scenario(servers, 1, 1, 0, double(servers), 1.0);
  CtmcModel model = build_generator(sc, PolicyKind::Ibs);
  CHECK(model.states.size() == std::size_t(servers + 1));
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  OracleMetrics om = oracle_metrics(pi, model, sc);
  CHECK(om.p_block ==
        doctest::Approx(erlang_b(servers, double(servers))).epsilon(1e-6));
}

TEST_CASE("whole-channel preemption with several channels stays consistent") {
  Scenario sc = small_scenario(3, 2, 2, 2, 1.5, 0.8, 0.6, 0.7);
  sc.policy.policy = PolicyKind::IbsQ;
  CtmcModel model = build_generator(sc, PolicyKind::IbsQ);
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  OracleMetrics om = oracle_metrics(pi, model, sc);
  CHECK(om.p_block >= 0.0);
  CHECK(om.p_block <= 1.0);
  CHECK(om.p_forced >= 0.0);
  CHECK(om.p_forced <= 1.0);
  CHECK(om.mean_queue_len >= 0.0);
  CHECK(om.mean_queue_len <= 4.0);
  // every state is reachable and proper
  CHECK(pi.minCoeff() >= 0.0);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
}
