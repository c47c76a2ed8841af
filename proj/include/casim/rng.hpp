#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace casim {

/// Inverse-transform exponential draw from a uniform u in (0, 1].
double exponential_from_uniform(double rate, double u);

// Named random substream. Each stochastic process in a run owns one, seeded
// from (seed, name), so changing one process's draw count never perturbs the
// sequences seen by the others. That is what makes common-random-numbers
// comparisons across policies work.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name);

  /// Uniform on (0, 1].
  double uniform01();

  /// Uniform on [0, 1).
  double uniform01_halfopen();

  /// Uniform integer in [0, n). Requires n >= 1.
  int uniform_int(int n);

  /// Exponential with the given rate (> 0); strictly positive.
  double exponential(double rate);

  /// Number of engine draws consumed so far.
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

// Service completion is exponential with total rate theta * mu: aggregating
// theta slots multiplies the per-slot service rate.
double su_service_duration(int theta, double per_slot_rate, RngStream& stream);

// The substream bundle for one simulation run.
struct RngSet {
  RngStream pu;                        // PU interarrivals, target pick, holding
  std::vector<RngStream> su_arrival;   // per class: interarrivals + initial SNR
  std::vector<RngStream> su_service;   // per class: service durations
  RngStream snr;                       // SNR transition sampling
  RngStream queue;                     // exponential deadline draws

  RngSet(std::uint64_t seed, int num_classes);
};

}  // namespace casim
