#pragma once

#include <cstdint>
#include <span>

namespace casim {

// Raw event tallies for one run's observation window. Probabilities and
// rates are derived, never stored.
struct CounterSet {
  std::uint64_t su_arrivals = 0;
  std::uint64_t su_blocked = 0;
  std::uint64_t su_admitted = 0;           // direct admissions plus enqueues
  std::uint64_t su_forced_terminated = 0;  // preemption losses + queue drops
  std::uint64_t su_completed = 0;

  std::uint64_t pu_arrivals = 0;
  std::uint64_t pu_blocked = 0;  // all channels PU-held on arrival

  double queue_occupancy_integral = 0.0;  // integral of buffered count over time
  double observation_time = 0.0;          // horizon minus warm-up

  /// Admitted SUs still in service or buffered when the run ended.
  std::uint64_t in_system() const {
    return su_admitted - su_completed - su_forced_terminated;
  }
};

/// Blocked fraction of arrivals. Requires su_arrivals > 0.
double blocking_probability(const CounterSet& c);

/// Forced-termination fraction of admissions. Requires su_admitted > 0.
double forced_termination_probability(const CounterSet& c);

/// Exactly 1 - blocking_probability.
double access_probability(const CounterSet& c);

/// Service completions per second of observation time.
double su_capacity(const CounterSet& c);

/// Time-average buffered count over the observation window.
double mean_queue_length(const CounterSet& c);

// Independent-replication statistics: sample mean, sample standard deviation
// and the Student-t 95% half-width.
struct ReplicationSummary {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double ci95_half = 0.0;
};

/// Two-sided 97.5% Student-t quantile for the given degrees of freedom.
double student_t_975(int df);

/// Requires at least 2 values.
ReplicationSummary summarize(std::span<const double> values);

}  // namespace casim
