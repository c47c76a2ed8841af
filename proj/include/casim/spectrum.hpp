#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace casim {

class RngStream;

// ---------------------------------------------------------------------------
// AMC modes and frame arithmetic
// ---------------------------------------------------------------------------

// One adaptive modulation/coding mode: the half-open SNR interval
// [snr_low_db, snr_high_db) that selects it and the bits carried per symbol.
struct AmcMode {
  int index = 1;                 // 1..N
  double bits_per_symbol = 1.0;  // r_n, strictly increasing with index
  double snr_low_db = 0.0;
  double snr_high_db = 0.0;
};

/// Throws std::invalid_argument unless the table is nonempty, ordered, with
/// pairwise-disjoint increasing intervals and strictly increasing rates.
void validate_amc_table(std::span<const AmcMode> table);

struct FrameConfig {
  double message_bits = 1.0;      // message length in bits
  double channel_constant = 1.0;  // dimensionless, > 0
  double symbol_rate = 1.0;       // symbols/second, > 0
};

void validate_frame_config(const FrameConfig& cfg);

// Slots per frame: ceil((bits / (r_n * eps * sym_rate)) * r_n). The rate
// factor cancels algebraically, so every mode of a valid table yields the
// same count; it is kept in the expression so the cancellation is checkable.
int compute_frame_slots(const FrameConfig& cfg, const AmcMode& mode);

// Highest mode whose lower threshold gamma meets; nullopt below the lowest
// threshold (outage, no transmission). Monotone in gamma by construction.
// Throws on NaN input.
std::optional<AmcMode> snr_to_mode(double gamma_db, std::span<const AmcMode> table);

// ---------------------------------------------------------------------------
// PU busy/idle channel process
// ---------------------------------------------------------------------------

// Two-state Markov chain per channel: OFF -> ON with probability off_to_on,
// ON -> OFF with probability on_to_off, per transition epoch.
struct PuChannelProcess {
  int channel_index = 0;
  double off_to_on = 0.0;  // A_i
  double on_to_off = 0.0;  // C_i
  bool on = false;
};

/// Rejects probabilities outside [0,1] and the frozen chain A + C = 0.
void validate_pu_process(const PuChannelProcess& p);

/// Long-run ON fraction A / (A + C). Throws on the frozen chain.
double channel_utilization(const PuChannelProcess& p);

/// Advances the chain one epoch in place; returns the new state.
bool sample_pu_transition(PuChannelProcess& p, RngStream& rng);

// ---------------------------------------------------------------------------
// SNR class process
// ---------------------------------------------------------------------------

enum class SnrClass : int { Good = 0, Moderate = 1, Bad = 2 };
inline constexpr int kSnrClassCount = 3;

const char* to_string(SnrClass c);
std::optional<SnrClass> snr_class_from_string(std::string_view s);

using SnrMatrix = std::array<std::array<double, 3>, 3>;

/// Each row must sum to 1 within 1e-12 with nonnegative entries.
void validate_snr_matrix(const SnrMatrix& m);

struct SnrProcess {
  std::uint64_t su_id = 0;
  SnrClass state = SnrClass::Good;
  SnrMatrix matrix{};
};

/// Draws the next class from the current class's row; updates state.
SnrClass sample_snr_transition(SnrProcess& proc, RngStream& rng);

/// Draws a class from an arbitrary 3-way distribution (used for initial SNR).
SnrClass sample_snr_initial(const std::array<double, 3>& probs, RngStream& rng);

// ---------------------------------------------------------------------------
// Spectrum pool
// ---------------------------------------------------------------------------

struct SlotRef {
  int channel = 0;
  int slot = 0;
  friend bool operator==(const SlotRef&, const SlotRef&) = default;
  friend auto operator<=>(const SlotRef&, const SlotRef&) = default;
};

enum class SlotTag : std::uint8_t { Free, Pu, Su };

struct SlotOwner {
  SlotTag tag = SlotTag::Free;
  std::uint64_t su_id = 0;  // valid iff tag == Su
};

// M x S slot grid with per-slot ownership. A PU holds whole channels; SU
// allocations hold explicit slot sets. One simulation run owns one pool.
class SpectrumPool {
 public:
  SpectrumPool(int num_channels, int slots_per_channel);

  int num_channels() const { return num_channels_; }
  int slots_per_channel() const { return slots_per_channel_; }
  int total_slots() const { return num_channels_ * slots_per_channel_; }

  /// Channel-index validity predicate (0-based).
  bool contains_channel(int channel) const {
    return channel >= 0 && channel < num_channels_;
  }

  const SlotOwner& owner(int channel, int slot) const;
  bool pu_holds(int channel) const { return pu_on_[channel]; }
  int pu_channels_on() const { return pu_channels_on_; }

  int free_slots() const { return free_count_; }
  int pu_slots() const { return pu_channels_on_ * slots_per_channel_; }
  int su_slots() const { return total_slots() - free_count_ - pu_slots(); }

  /// True when `count` slots can be granted under the placement rule.
  bool can_allocate(int count, bool contiguous) const;

  // Picks `count` free slots (first-fit in channel-major order; a contiguous
  // run when requested). Empty result means placement is impossible.
  std::vector<SlotRef> take_free_slots(int count, bool contiguous = false);

  /// Marks `slots` (all currently free) as owned by `su_id`.
  void assign(std::span<const SlotRef> slots, std::uint64_t su_id);

  /// Releases `slots` (all currently owned by `su_id`) back to free.
  void release(std::span<const SlotRef> slots, std::uint64_t su_id);

  // Marks every slot of `channel` as PU-held and returns the distinct SU ids
  // that were occupying it, in slot order. The caller reconciles allocations.
  std::vector<std::uint64_t> seize_channel_for_pu(int channel);

  /// Frees every slot of a PU-held channel.
  void release_pu_channel(int channel);

  /// Recomputes cached counts from the grid; true when consistent.
  bool audit_consistent() const;

 private:
  SlotOwner& owner_mut(int channel, int slot);

  int num_channels_;
  int slots_per_channel_;
  std::vector<SlotOwner> grid_;  // channel-major
  std::vector<bool> pu_on_;
  int free_count_ = 0;
  int pu_channels_on_ = 0;
};

// ---------------------------------------------------------------------------
// Capacity arithmetic
// ---------------------------------------------------------------------------

// Expected PU slot take: S * sum_i utilization(proc_i). Requires one process
// per pool channel.
double pu_slot_capacity(const SpectrumPool& pool,
                        std::span<const PuChannelProcess> procs);

/// Remainder after PU occupancy: M*S - pu_capacity.
double su_slot_capacity(const SpectrumPool& pool, double pu_capacity);

}  // namespace casim
