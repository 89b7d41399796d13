#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "ici/packet.hpp"
#include "ici/units.hpp"

namespace ici {

// RED-style marking curve over egress occupancy in packets.
struct EcnMarkerConfig {
  double k_min = 5;
  double k_max = 40;
  double p_max = 0.1;

  // Throws ConfigError unless 0 <= k_min < k_max <= capacity and 0 < p_max <= 1.
  void validate(double egress_capacity_packets) const;
};

// 0 at or below k_min, p_max at or above k_max, linear in between.
double mark_probability(const EcnMarkerConfig& cfg, double egress_occupancy);

struct DcqcnParams {
  double g = 1.0 / 16;
  SimTime notification_window = 50 * kMicrosecond;
  SimTime alpha_timer = 55 * kMicrosecond;
  SimTime increase_timer = 300 * kMicrosecond;
  std::uint64_t byte_counter = 10ull * 1024 * 1024;
  std::uint32_t fast_recovery_stages = 5;
  double rate_ai = 5e9;
  double min_rate = 1e8;
  double link_rate = 100e9;

  void validate() const;
};

// Reaction-point state of one flow at its source NIC.
struct RateState {
  double current_rate = 0;
  double target_rate = 0;
  double alpha = 1.0;
  std::uint32_t timer_stage = 0;
  std::uint32_t byte_stage = 0;
  std::uint64_t bytes_since_stage = 0;
  std::uint64_t becn_rx_count = 0;
  bool becn_since_alpha_tick = false;

  bool at_line_rate(const DcqcnParams& p) const { return current_rate >= p.link_rate; }
};

RateState initial_rate_state(const DcqcnParams& p);

// Multiplicative decrease on a delivered BECN.
RateState rp_on_becn(RateState s, const DcqcnParams& p);

enum class IncreaseTrigger : std::uint8_t { kTimer, kByteCounter };

// One recovery stage: fast recovery halves the gap to target for the first
// F stages, afterwards target grows additively by rate_ai.
RateState rp_increase_tick(RateState s, const DcqcnParams& p, IncreaseTrigger trigger);

// Alpha decays by (1-g) for every alpha period without a BECN.
RateState rp_alpha_tick(RateState s, const DcqcnParams& p);

// Receiver-NIC BECN generation with a per-flow notification window.
class BecnNotifier {
 public:
  explicit BecnNotifier(SimTime window = 50 * kMicrosecond) : window_(window) {}

  // True when a BECN for `flow` must be sent now.
  bool nic_on_marked_packet(const FlowTuple& flow, SimTime now);

  std::uint64_t suppressed() const { return suppressed_; }

 private:
  SimTime window_;
  std::unordered_map<FlowTuple, SimTime, FlowTupleHash> last_sent_;
  std::uint64_t suppressed_ = 0;
};

}  // namespace ici
