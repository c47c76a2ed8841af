#include "casim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace casim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double exponential_from_uniform(double rate, double u) {
  if (rate <= 0.0) throw std::invalid_argument("exponential rate must be > 0");
  return -std::log(u) / rate;
}

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : engine_(splitmix64(seed ^ fnv1a(name))) {}

double RngStream::uniform01_halfopen() {
  ++draws_;
  // 53 high bits -> double in [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform01() { return 1.0 - uniform01_halfopen(); }

int RngStream::uniform_int(int n) {
  if (n < 1) throw std::invalid_argument("uniform_int requires n >= 1");
  int v = static_cast<int>(uniform01_halfopen() * n);
  return v < n ? v : n - 1;
}

double RngStream::exponential(double rate) {
  return exponential_from_uniform(rate, uniform01());
}

double su_service_duration(int theta, double per_slot_rate, RngStream& stream) {
  if (theta < 1) throw std::invalid_argument("service duration requires theta >= 1");
  return stream.exponential(static_cast<double>(theta) * per_slot_rate);
}

RngSet::RngSet(std::uint64_t seed, int num_classes)
    : pu(seed, "pu"), snr(seed, "snr"), queue(seed, "queue") {
  su_arrival.reserve(num_classes);
  su_service.reserve(num_classes);
  for (int k = 0; k < num_classes; ++k) {
    su_arrival.emplace_back(seed, "su_arrival/" + std::to_string(k));
    su_service.emplace_back(seed, "su_service/" + std::to_string(k));
  }
}

}  // namespace casim
