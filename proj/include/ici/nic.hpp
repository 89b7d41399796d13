#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ici/dcqcn.hpp"
#include "ici/packet.hpp"
#include "ici/pfc.hpp"
#include "ici/sim_core.hpp"

namespace ici {

struct NicConfig {
  std::uint32_t vl_count = 1;
  BitsPerSecond link_rate = 100 * kGbps;
  bool dcqcn_enabled = false;
  DcqcnParams dcqcn;
};

enum class NicTimer : std::uint32_t { kAlpha = 0, kIncrease = 1 };

// Terminal NIC: per-flow send queues served round-robin, paced by each
// flow's DCQCN rate, plus the receiver-side BECN notifier.
class HostNic {
 public:
  HostNic(std::uint32_t id, const NicConfig& cfg, PacketPool& pool, Engine& engine);

  void enqueue(PacketId id);
  void push_control(PacketId id) { control_.push_back(id); }

  struct Pick {
    std::optional<PacketId> packet;
    std::optional<SimTime> wake_at;  // earliest time a paced flow becomes eligible
  };
  Pick next_packet(SimTime now);

  void apply_pause(std::uint32_t vl, PfcFrame frame) { permission_.apply_pause(frame, vl); }
  bool may_send(std::uint32_t vl) const { return permission_.may_send(vl); }

  // Reaction point: a BECN for one of this host's flows arrived.
  void on_becn(const FlowTuple& flow, SimTime now);
  void on_timer(NicTimer timer, std::uint64_t aux, SimTime now);

  // Notification point: true if a BECN must be returned for this packet.
  bool on_marked_delivery(const FlowTuple& flow, SimTime now) {
    return notifier_.nic_on_marked_packet(flow, now);
  }

  bool busy() const { return busy_; }
  void set_busy(bool b) { busy_ = b; }
  bool has_pending() const { return !control_.empty() || !active_.empty(); }

  // Earliest pending NicWake time, for de-duplicating wake events.
  std::optional<SimTime>& scheduled_wake() { return scheduled_wake_; }

  std::optional<RateState> rate_of(const FlowTuple& flow) const;
  std::uint64_t becn_received() const { return becn_received_; }
  std::uint64_t becn_orphaned() const { return becn_orphaned_; }
  std::size_t live_flows() const { return index_.size(); }

 private:
  struct Flow {
    FlowTuple tuple;
    std::uint8_t vl = 0;
    std::deque<PacketId> queue;
    RateState rate;
    SimTime next_send = 0;
    bool in_use = false;
    bool active = false;
    bool timers_running = false;
    std::uint32_t alpha_gen = 0;
    std::uint32_t inc_gen = 0;
  };

  std::uint32_t flow_slot(const Packet& pkt);
  void maybe_release(std::uint32_t slot);
  void arm(NicTimer timer, std::uint32_t slot, SimTime at);

  std::uint32_t id_;
  NicConfig cfg_;
  PacketPool& pool_;
  Engine& engine_;
  BecnNotifier notifier_;
  LinkPermission permission_;
  std::deque<PacketId> control_;
  std::vector<Flow> flows_;
  std::vector<std::uint32_t> free_;
  std::unordered_map<FlowTuple, std::uint32_t, FlowTupleHash> index_;
  std::vector<std::uint32_t> active_;
  std::size_t rr_ = 0;
  bool busy_ = false;
  std::optional<SimTime> scheduled_wake_;
  std::uint64_t becn_received_ = 0;
  std::uint64_t becn_orphaned_ = 0;
};

}  // namespace ici
