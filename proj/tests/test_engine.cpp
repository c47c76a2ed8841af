#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "casim/event_list.hpp"
#include "casim/rng.hpp"

using namespace casim;

TEST_CASE("events pop in timestamp order") {
  EventList list;
  list.schedule({5.0, EventKind::MeasureTick, -1, -1, 1, 0});
  list.schedule({3.0, EventKind::MeasureTick, -1, -1, 2, 0});
  auto first = list.pop_next();
  REQUIRE(first);
  CHECK(first->time == 3.0);
  CHECK(list.clock() == 3.0);
  auto second = list.pop_next();
  REQUIRE(second);
  CHECK(second->time == 5.0);
}

TEST_CASE("simultaneous events pop in schedule order") {
  EventList list;
  list.schedule({7.0, EventKind::MeasureTick, -1, -1, 10, 0});
  list.schedule({7.0, EventKind::MeasureTick, -1, -1, 20, 0});
  CHECK(list.pop_next()->id == 10);
  CHECK(list.pop_next()->id == 20);
}

TEST_CASE("an event at the current clock precedes later ones") {
  EventList list;
  list.schedule({2.0, EventKind::MeasureTick, -1, -1, 1, 0});
  list.pop_next();
  list.schedule({9.0, EventKind::MeasureTick, -1, -1, 2, 0});
  list.schedule({2.0, EventKind::MeasureTick, -1, -1, 3, 0});
  CHECK(list.pop_next()->id == 3);
}

TEST_CASE("past timestamps are rejected") {
  EventList list;
  list.schedule({4.0, EventKind::MeasureTick, -1, -1, 1, 0});
  list.pop_next();
  CHECK_THROWS_AS(list.schedule({3.9, EventKind::MeasureTick, -1, -1, 2, 0}),
                  std::invalid_argument);
}

TEST_CASE("empty list and horizon both yield END") {
  EventList empty;
  CHECK(!empty.pop_next());

  EventList clamped(100.0);
  clamped.schedule({101.0, EventKind::MeasureTick, -1, -1, 1, 0});
  CHECK(!clamped.pop_next());
  CHECK(clamped.clock() <= 100.0);

  EventList at_edge(100.0);
  at_edge.schedule({100.0, EventKind::MeasureTick, -1, -1, 1, 0});
  CHECK(at_edge.pop_next());
}

TEST_CASE("pops come out in nondecreasing time") {
  EventList list;
  RngStream rng(17, "times");
  for (int i = 0; i < 200; ++i)
    list.schedule({10.0 * rng.uniform01(), EventKind::MeasureTick, -1, -1, 0, 0});
  double last = 0.0;
  while (auto ev = list.pop_next()) {
    CHECK(ev->time >= last);
    last = ev->time;
  }
}

TEST_CASE("streams replay exactly and differ across names") {
  RngStream a(123, "arrivals");
  RngStream b(123, "arrivals");
  RngStream c(123, "services");
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    double va = a.uniform01();
    all_equal = all_equal && va == b.uniform01();
    any_diff = any_diff || va != c.uniform01();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("inverse transform identity") {
  CHECK(exponential_from_uniform(1.0, 1.0 / std::exp(1.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(exponential_from_uniform(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("exponential sample moments") {
  RngStream rng(2024, "exp");
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = rng.exponential(2.0);
    CHECK(d > 0.0);
    sum += d;
    sumsq += d * d;
  }
  double mean = sum / n;
  CHECK(std::abs(mean - 0.5) < 0.002);

  RngStream rng1(2025, "exp1");
  sum = sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = rng1.exponential(1.0);
    sum += d;
    sumsq += d * d;
  }
  mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("aggregated service rate scales with the slot count") {
  RngStream rng(7, "svc");
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += su_service_duration(4, 1.0, rng);
  CHECK(std::abs(sum / n - 0.25) < 0.002);

  // theta = 1 reduces to the plain exponential law, draw for draw
  RngStream s1(55, "same");
  RngStream s2(55, "same");
  for (int i = 0; i < 100; ++i)
    CHECK(su_service_duration(1, 0.7, s1) == s2.exponential(0.7));

  // doubling theta halves the mean
  RngStream d2(90, "double");
  double sum2 = 0.0, sum4 = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) sum2 += su_service_duration(2, 1.0, d2);
  for (int i = 0; i < m; ++i) sum4 += su_service_duration(4, 1.0, d2);
  CHECK(std::abs((sum2 / m) / (sum4 / m) - 2.0) < 0.05);

  CHECK_THROWS_AS(su_service_duration(0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("uniform_int stays in range and covers it") {
  RngStream rng(31, "pick");
  bool seen[5] = {};
  for (int i = 0; i < 1000; ++i) {
    int v = rng.uniform_int(5);
    REQUIRE(v >= 0);
    REQUIRE(v < 5);
    seen[v] = true;
  }
  for (bool s : seen) CHECK(s);
}
