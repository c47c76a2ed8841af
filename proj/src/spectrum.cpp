#include "casim/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "casim/rng.hpp"

namespace casim {

// ---------------------------------------------------------------------------
// AMC modes and frame arithmetic
// ---------------------------------------------------------------------------

void validate_amc_table(std::span<const AmcMode> table) {
  if (table.empty()) throw std::invalid_argument("AMC table must be nonempty");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const AmcMode& m = table[i];
    if (m.bits_per_symbol <= 0.0)
      throw std::invalid_argument("AMC mode " + std::to_string(m.index) +
                                  ": bits_per_symbol must be > 0");
    if (!(m.snr_low_db < m.snr_high_db))
      throw std::invalid_argument("AMC mode " + std::to_string(m.index) +
                                  ": snr interval must be nonempty");
    if (i > 0) {
      const AmcMode& prev = table[i - 1];
      if (m.snr_low_db < prev.snr_high_db)
        throw std::invalid_argument("AMC intervals must be disjoint and ordered");
      if (m.bits_per_symbol <= prev.bits_per_symbol)
        throw std::invalid_argument("AMC rates must strictly increase with mode");
    }
  }
}

void validate_frame_config(const FrameConfig& cfg) {
  if (cfg.message_bits <= 0.0 || cfg.channel_constant <= 0.0 ||
      cfg.symbol_rate <= 0.0)
    throw std::invalid_argument("frame config fields must be strictly positive");
}

int compute_frame_slots(const FrameConfig& cfg, const AmcMode& mode) {
  validate_frame_config(cfg);
  if (mode.bits_per_symbol <= 0.0)
    throw std::invalid_argument("bits_per_symbol must be > 0");
  double x = cfg.message_bits /
             (mode.bits_per_symbol * cfg.channel_constant * cfg.symbol_rate) *
             mode.bits_per_symbol;
  // The division/multiplication by the rate cancels exactly in real
  // arithmetic; snap near-integers so rounding noise cannot push the ceiling
  // across an integer boundary.
  double snapped = std::round(x);
  if (std::abs(x - snapped) <= 1e-9 * std::max(1.0, std::abs(x))) x = snapped;
  return std::max(1, static_cast<int>(std::ceil(x)));
}

std::optional<AmcMode> snr_to_mode(double gamma_db, std::span<const AmcMode> table) {
  if (std::isnan(gamma_db)) throw std::invalid_argument("SNR is NaN");
  validate_amc_table(table);
  std::optional<AmcMode> best;
  for (const AmcMode& m : table) {
    if (gamma_db >= m.snr_low_db) best = m;
  }
  return best;
}

// ---------------------------------------------------------------------------
// PU busy/idle channel process
// ---------------------------------------------------------------------------

void validate_pu_process(const PuChannelProcess& p) {
  if (p.off_to_on < 0.0 || p.off_to_on > 1.0)
    throw std::invalid_argument("channel " + std::to_string(p.channel_index) +
                                ": off_to_on must lie in [0, 1]");
  if (p.on_to_off < 0.0 || p.on_to_off > 1.0)
    throw std::invalid_argument("channel " + std::to_string(p.channel_index) +
                                ": on_to_off must lie in [0, 1]");
  if (p.off_to_on + p.on_to_off <= 0.0)
    throw std::invalid_argument("channel " + std::to_string(p.channel_index) +
                                ": frozen chain, off_to_on + on_to_off must be > 0");
}

double channel_utilization(const PuChannelProcess& p) {
  validate_pu_process(p);
  return p.off_to_on / (p.off_to_on + p.on_to_off);
}

bool sample_pu_transition(PuChannelProcess& p, RngStream& rng) {
  double u = rng.uniform01_halfopen();
  if (p.on) {
    if (u < p.on_to_off) p.on = false;
  } else {
    if (u < p.off_to_on) p.on = true;
  }
  return p.on;
}

// ---------------------------------------------------------------------------
// SNR class process
// ---------------------------------------------------------------------------

const char* to_string(SnrClass c) {
  switch (c) {
    case SnrClass::Good: return "good";
    case SnrClass::Moderate: return "moderate";
    case SnrClass::Bad: return "bad";
  }
  return "?";
}

std::optional<SnrClass> snr_class_from_string(std::string_view s) {
  if (s == "good" || s == "g") return SnrClass::Good;
  if (s == "moderate" || s == "m") return SnrClass::Moderate;
  if (s == "bad" || s == "b") return SnrClass::Bad;
  return std::nullopt;
}

void validate_snr_matrix(const SnrMatrix& m) {
  for (int r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
      if (m[r][c] < 0.0)
        throw std::invalid_argument("snr matrix entries must be >= 0");
      sum += m[r][c];
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("snr matrix row " + std::to_string(r) +
                                  " must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

namespace {

SnrClass pick3(const std::array<double, 3>& probs, double u) {
  if (u < probs[0]) return SnrClass::Good;
  if (u < probs[0] + probs[1]) return SnrClass::Moderate;
  return SnrClass::Bad;
}

}  // namespace

SnrClass sample_snr_transition(SnrProcess& proc, RngStream& rng) {
  const auto& row = proc.matrix[static_cast<int>(proc.state)];
  proc.state = pick3(row, rng.uniform01_halfopen());
  return proc.state;
}

SnrClass sample_snr_initial(const std::array<double, 3>& probs, RngStream& rng) {
  return pick3(probs, rng.uniform01_halfopen());
}

// ---------------------------------------------------------------------------
// Spectrum pool
// ---------------------------------------------------------------------------

SpectrumPool::SpectrumPool(int num_channels, int slots_per_channel)
    : num_channels_(num_channels), slots_per_channel_(slots_per_channel) {
  if (num_channels < 1 || slots_per_channel < 1)
    throw std::invalid_argument("pool needs at least one channel and one slot");
  grid_.resize(static_cast<std::size_t>(num_channels) * slots_per_channel);
  pu_on_.assign(num_channels, false);
  free_count_ = total_slots();
}

const SlotOwner& SpectrumPool::owner(int channel, int slot) const {
  return grid_[static_cast<std::size_t>(channel) * slots_per_channel_ + slot];
}

SlotOwner& SpectrumPool::owner_mut(int channel, int slot) {
  return grid_[static_cast<std::size_t>(channel) * slots_per_channel_ + slot];
}

bool SpectrumPool::can_allocate(int count, bool contiguous) const {
  if (count < 1) return false;
  if (free_count_ < count) return false;
  if (!contiguous) return true;
  int run = 0;
  for (const SlotOwner& o : grid_) {
    run = (o.tag == SlotTag::Free) ? run + 1 : 0;
    if (run >= count) return true;
  }
  return false;
}

std::vector<SlotRef> SpectrumPool::take_free_slots(int count, bool contiguous) {
  std::vector<SlotRef> out;
  if (!can_allocate(count, contiguous)) return out;
  out.reserve(count);
  if (contiguous) {
    int run = 0;
    for (int idx = 0; idx < total_slots(); ++idx) {
      run = (grid_[idx].tag == SlotTag::Free) ? run + 1 : 0;
      if (run >= count) {
        for (int j = idx - count + 1; j <= idx; ++j)
          out.push_back({j / slots_per_channel_, j % slots_per_channel_});
        return out;
      }
    }
    out.clear();
    return out;
  }
  for (int idx = 0; idx < total_slots() && static_cast<int>(out.size()) < count; ++idx) {
    if (grid_[idx].tag == SlotTag::Free)
      out.push_back({idx / slots_per_channel_, idx % slots_per_channel_});
  }
  return out;
}

void SpectrumPool::assign(std::span<const SlotRef> slots, std::uint64_t su_id) {
  for (const SlotRef& s : slots) {
    SlotOwner& o = owner_mut(s.channel, s.slot);
    if (o.tag != SlotTag::Free)
      throw std::logic_error("assign: slot not free");
    o = {SlotTag::Su, su_id};
    --free_count_;
  }
}

void SpectrumPool::release(std::span<const SlotRef> slots, std::uint64_t su_id) {
  for (const SlotRef& s : slots) {
    SlotOwner& o = owner_mut(s.channel, s.slot);
    if (o.tag != SlotTag::Su || o.su_id != su_id)
      throw std::logic_error("release: slot not held by this SU");
    o = {SlotTag::Free, 0};
    ++free_count_;
  }
}

std::vector<std::uint64_t> SpectrumPool::seize_channel_for_pu(int channel) {
  if (!contains_channel(channel)) throw std::invalid_argument("bad channel index");
  if (pu_on_[channel]) throw std::logic_error("channel already PU-held");
  std::vector<std::uint64_t> displaced;
  for (int s = 0; s < slots_per_channel_; ++s) {
    SlotOwner& o = owner_mut(channel, s);
    if (o.tag == SlotTag::Su) {
      if (std::find(displaced.begin(), displaced.end(), o.su_id) == displaced.end())
        displaced.push_back(o.su_id);
    } else if (o.tag == SlotTag::Free) {
      --free_count_;
    }
    o = {SlotTag::Pu, 0};
  }
  pu_on_[channel] = true;
  ++pu_channels_on_;
  return displaced;
}

void SpectrumPool::release_pu_channel(int channel) {
  if (!contains_channel(channel)) throw std::invalid_argument("bad channel index");
  if (!pu_on_[channel]) throw std::logic_error("channel not PU-held");
  for (int s = 0; s < slots_per_channel_; ++s) {
    owner_mut(channel, s) = {SlotTag::Free, 0};
    ++free_count_;
  }
  pu_on_[channel] = false;
  --pu_channels_on_;
}

bool SpectrumPool::audit_consistent() const {
  int free = 0, pu = 0;
  for (int ch = 0; ch < num_channels_; ++ch) {
    for (int s = 0; s < slots_per_channel_; ++s) {
      const SlotOwner& o = owner(ch, s);
      if (o.tag == SlotTag::Free) ++free;
      if (o.tag == SlotTag::Pu) ++pu;
      if (pu_on_[ch] != (o.tag == SlotTag::Pu)) return false;
    }
  }
  return free == free_count_ && pu == pu_channels_on_ * slots_per_channel_;
}

// ---------------------------------------------------------------------------
// Capacity arithmetic
// ---------------------------------------------------------------------------

double pu_slot_capacity(const SpectrumPool& pool,
                        std::span<const PuChannelProcess> procs) {
  if (static_cast<int>(procs.size()) != pool.num_channels())
    throw std::invalid_argument("need exactly one PU process per channel");
  double sum = 0.0;
  for (const PuChannelProcess& p : procs) sum += channel_utilization(p);
  return pool.slots_per_channel() * sum;
}

double su_slot_capacity(const SpectrumPool& pool, double pu_capacity) {
  double total = static_cast<double>(pool.total_slots());
  if (pu_capacity < 0.0 || pu_capacity > total)
    throw std::invalid_argument("pu capacity out of [0, M*S]");
  return total - pu_capacity;
}

}  // namespace casim
