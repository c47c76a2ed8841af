#include "casim/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>

namespace casim {

namespace {

// Runs fn(0..n-1) on a small worker pool; results land wherever fn writes
// them, so output order never depends on scheduling.
void parallel_for_index(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<ResultRow> run_replications(const Scenario& sc, PolicyKind policy,
                                        std::uint64_t base_seed, int replications,
                                        int threads, SimOptions opts) {
  std::vector<ResultRow> rows(replications);
  parallel_for_index(replications, threads, [&](int k) {
    try {
      Simulator sim(sc, policy, base_seed + static_cast<std::uint64_t>(k), opts);
      rows[k] = {policy, std::nullopt, k, sim.run()};
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(k) + ": " + e.what());
    }
  });
  return rows;
}

std::vector<ResultRow> run_sweep(const Scenario& base, const std::string& param,
                                 const std::vector<double>& values,
                                 const std::vector<PolicyKind>& policies,
                                 std::uint64_t base_seed, int replications,
                                 int threads, SimOptions opts) {
  struct Cell {
    Scenario sc;
    PolicyKind policy;
    double value;
    int replication;
  };
  std::vector<Cell> cells;
  cells.reserve(policies.size() * values.size() * replications);
  for (PolicyKind policy : policies) {
    for (double value : values) {
      Scenario sc = base;
      apply_param(sc, param, value);
      for (int k = 0; k < replications; ++k) cells.push_back({sc, policy, value, k});
    }
  }
  std::vector<ResultRow> rows(cells.size());
  parallel_for_index(static_cast<int>(cells.size()), threads, [&](int i) {
    const Cell& cell = cells[i];
    try {
      Simulator sim(cell.sc, cell.policy,
                    base_seed + static_cast<std::uint64_t>(cell.replication), opts);
      rows[i] = {cell.policy, cell.value, cell.replication, sim.run()};
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(to_string(cell.policy)) + " at " + param +
                               "=" + format_double(cell.value) + ", replication " +
                               std::to_string(cell.replication) + ": " + e.what());
    }
  });
  return rows;
}

void write_raw_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "policy,swept_value,replication,P_b,P_f,P_a,capacity,mean_queue_len,"
        "arrivals,blocked,admitted,dropped,completed,in_system\n";
  for (const ResultRow& r : rows) {
    const CounterSet& c = r.result.counters;
    os << to_string(r.policy) << ',';
    if (r.swept_value) os << format_double(*r.swept_value);
    os << ',' << r.replication << ',' << format_double(r.result.p_block()) << ','
       << format_double(r.result.p_forced()) << ',' << format_double(r.result.p_access())
       << ',' << format_double(r.result.capacity()) << ','
       << format_double(r.result.mean_queue_len()) << ',' << c.su_arrivals << ','
       << c.su_blocked << ',' << c.su_admitted << ',' << c.su_forced_terminated << ','
       << c.su_completed << ',' << c.in_system() << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "policy,swept_value,metric,mean,stddev,ci95_half,replications\n";
  // Group rows by (policy, value) in first-appearance order.
  struct Group {
    PolicyKind policy;
    std::optional<double> value;
    std::vector<const ResultRow*> rows;
  };
  std::vector<Group> groups;
  for (const ResultRow& r : rows) {
    Group* g = nullptr;
    for (Group& cand : groups) {
      if (cand.policy == r.policy && cand.value == r.swept_value) {
        g = &cand;
        break;
      }
    }
    if (!g) {
      groups.push_back({r.policy, r.swept_value, {}});
      g = &groups.back();
    }
    g->rows.push_back(&r);
  }

  static const char* metric_names[] = {"P_b", "P_f", "P_a", "capacity", "mean_queue_len"};
  for (const Group& g : groups) {
    for (int m = 0; m < 5; ++m) {
      std::vector<double> values;
      values.reserve(g.rows.size());
      for (const ResultRow* r : g.rows) {
        switch (m) {
          case 0: values.push_back(r->result.p_block()); break;
          case 1: values.push_back(r->result.p_forced()); break;
          case 2: values.push_back(r->result.p_access()); break;
          case 3: values.push_back(r->result.capacity()); break;
          case 4: values.push_back(r->result.mean_queue_len()); break;
        }
      }
      os << to_string(g.policy) << ',';
      if (g.value) os << format_double(*g.value);
      os << ',' << metric_names[m] << ',';
      if (values.size() >= 2) {
        ReplicationSummary s = summarize(values);
        os << format_double(s.mean) << ',' << format_double(s.stddev) << ','
           << format_double(s.ci95_half) << ',' << s.n << '\n';
      } else {
        os << format_double(values.front()) << ",,," << values.size() << '\n';
      }
    }
  }
}

ValidationReport validate_against_oracle(const Scenario& sc, PolicyKind policy,
                                         std::uint64_t base_seed, int replications,
                                         int threads) {
  if (replications < 2)
    throw std::invalid_argument("validate needs at least 2 replications for a CI");
  CtmcModel model = build_generator(sc, policy);
  Eigen::VectorXd pi = solve_steady_state(model.generator);
  OracleMetrics exact = oracle_metrics(pi, model, sc);

  std::vector<ResultRow> rows =
      run_replications(sc, policy, base_seed, replications, threads);

  auto column = [&](double (RunResult::*fn)() const) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const ResultRow& r : rows) v.push_back((r.result.*fn)());
    return v;
  };

  ValidationReport report;
  report.states = static_cast<int>(model.states.size());
  auto add = [&](const std::string& name, const std::vector<double>& values,
                 double exact_value, double floor) {
    ReplicationSummary s = summarize(values);
    ValidateRow row;
    row.metric = name;
    row.simulated = s.mean;
    row.ci95_half = s.ci95_half;
    row.exact = exact_value;
    row.abs_diff = std::abs(s.mean - exact_value);
    row.pass = row.abs_diff <= s.ci95_half || row.abs_diff <= floor;
    report.rows.push_back(row);
  };
  add("P_b", column(&RunResult::p_block), exact.p_block, 0.01);
  add("P_f", column(&RunResult::p_forced), exact.p_forced, 0.01);
  add("capacity", column(&RunResult::capacity), exact.capacity,
      std::max(0.01, 0.05 * exact.capacity));
  add("mean_queue_len", column(&RunResult::mean_queue_len), exact.mean_queue_len,
      std::max(0.01, 0.05 * exact.mean_queue_len));
  report.all_pass = true;
  for (const ValidateRow& r : report.rows) report.all_pass = report.all_pass && r.pass;
  return report;
}

}  // namespace casim
