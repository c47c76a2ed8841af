#include "casim/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace casim {

double blocking_probability(const CounterSet& c) {
  if (c.su_arrivals == 0) throw std::domain_error("blocking probability needs arrivals > 0");
  return static_cast<double>(c.su_blocked) / static_cast<double>(c.su_arrivals);
}

double forced_termination_probability(const CounterSet& c) {
  if (c.su_admitted == 0)
    throw std::domain_error("forced-termination probability needs admissions > 0");
  return static_cast<double>(c.su_forced_terminated) / static_cast<double>(c.su_admitted);
}

double access_probability(const CounterSet& c) { return 1.0 - blocking_probability(c); }

double su_capacity(const CounterSet& c) {
  if (c.observation_time <= 0.0) throw std::domain_error("capacity needs observation time > 0");
  return static_cast<double>(c.su_completed) / c.observation_time;
}

double mean_queue_length(const CounterSet& c) {
  if (c.observation_time <= 0.0)
    throw std::domain_error("queue length needs observation time > 0");
  return c.queue_occupancy_integral / c.observation_time;
}

double student_t_975(int df) {
  static constexpr double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) throw std::invalid_argument("t quantile needs df >= 1");
  if (df <= 30) return table[df - 1];
  if (df <= 40) return 2.021;
  if (df <= 60) return 2.000;
  if (df <= 120) return 1.980;
  return 1.960;
}

ReplicationSummary summarize(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) throw std::invalid_argument("summary needs at least 2 replications");
  ReplicationSummary s;
  s.n = n;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  bool all_equal = true;
  for (double v : values) all_equal = all_equal && v == values.front();
  if (all_equal) {
    // identical replications have exactly zero spread; keep it exact
    s.mean = values.front();
    return s;
  }
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / (n - 1));
  s.ci95_half = student_t_975(n - 1) * s.stddev / std::sqrt(static_cast<double>(n));
  return s;
}

}  // namespace casim
