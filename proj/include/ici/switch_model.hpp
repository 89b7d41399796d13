#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ici/cft.hpp"
#include "ici/coordinator.hpp"
#include "ici/dcqcn.hpp"
#include "ici/packet.hpp"
#include "ici/pfc.hpp"
#include "ici/topology.hpp"

namespace ici {

// Raised when an enqueue would overrun a port's buffer: the network is
// lossless, so this means PFC was misconfigured.
class LosslessViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MarkingPolicy : std::uint8_t {
  kNone,         // no ECN marking
  kPlain,        // DCQCN marking on every packet
  kCoordinated,  // marking gated by the per-egress coordinator
};

struct CiConfig {
  bool enabled = false;
  CftKeyMode key_mode = CftKeyMode::kDestination;
  std::size_t capacity = 8;
  std::uint32_t detection_threshold = 32;  // packets, egress_cap / 2
  SimTime residency = 100 * kMicrosecond;
  // A key is a congestion candidate once it holds this many packets in an
  // over-threshold egress queue.
  std::uint32_t candidate_min_packets = 8;
  // ...and at least this share of the non-isolated egress backlog, so a
  // queue of evenly mixed flows isolates nothing.
  double candidate_min_share = 0.25;
  std::uint32_t cfq_entry_packets = 16;  // 64 KB per entry
  bool mirror_ingress = true;
  // Allow root detection on egresses recently paused by their downstream
  // neighbour. Off: such queues are branches of a tree rooted elsewhere.
  bool detect_at_branches = false;
};

struct SwitchConfig {
  std::uint32_t vl_count = 1;
  std::uint32_t mtu = kMtuBytes;
  std::uint64_t port_partition = 512 * 1024;
  std::uint64_t egress_cap = 256 * 1024;
  double speedup = 2.0;
  PfcConfig pfc;
  CiConfig ci;
  MarkingPolicy marking = MarkingPolicy::kNone;
  EcnMarkerConfig ecn;
  CoordinatorConfig coordinator;
  bool audit = false;
};

struct PfcSignal {
  std::uint32_t in_port = 0;
  std::uint32_t vl = 0;
  PfcFrame frame = PfcFrame::kPause;
};

enum class CftEventKind : std::uint8_t { kAllocate, kDeallocate, kTableFull };

struct CftEvent {
  SimTime time = 0;
  std::uint32_t switch_id = 0;
  std::uint32_t port = 0;
  bool ingress_side = false;
  CftEventKind kind = CftEventKind::kAllocate;
  FlowTuple key;
};

struct ModeEvent {
  std::uint32_t switch_id = 0;
  std::uint32_t port = 0;
  ModeTransition transition;
};

// Shared sinks for per-switch event logs, owned by the simulation.
struct SwitchLogs {
  std::vector<CftEvent> cft;
  std::vector<ModeEvent> modes;
};

struct SwitchCounters {
  std::uint64_t moved = 0;
  std::uint64_t marks_plain = 0;
  std::uint64_t marks_suppressed = 0;
  std::uint64_t marks_targeted = 0;
  std::uint64_t marks_in_gated_modes = 0;
  std::uint64_t victim_mark_violations = 0;
  std::uint64_t table_full_events = 0;
  std::uint64_t escalations = 0;
  std::uint64_t root_events = 0;
  std::uint64_t audit_checks = 0;
  std::uint64_t audit_violations = 0;
  std::uint32_t max_ingress_packets = 0;
  std::uint64_t max_egress_bytes = 0;
  std::uint32_t max_egress_packets = 0;
};

// Shared-buffer switch: per-port ingress FIFOs and CFQs, a fabric with
// speedup that moves heads to per-port egress queues, and egress scheduling
// with ECN marking at dequeue. Timing is driven by the owning simulation.
class Switch {
 public:
  Switch(std::uint32_t id, const MinTopology& topo, const SwitchConfig& cfg, PacketPool& pool,
         std::uint64_t seed, SwitchLogs* logs = nullptr);

  struct IngressReceipt {
    bool isolated = false;
    std::optional<std::uint32_t> control_out_port;
    std::optional<PfcFrame> frame;
  };
  // Throws LosslessViolation when the port budget or partition would overflow.
  IngressReceipt ingress_accept(PacketId id, std::uint32_t in_port, SimTime now);

  struct FabricResult {
    std::uint32_t moved = 0;
    std::vector<PfcSignal> signals;
    std::vector<std::uint32_t> ready_ports;  // egress ports that received packets
    bool backlog = false;                    // ingress packets still waiting
  };
  // One arbitration quantum: refills speedup credit and moves heads
  // round-robin across input ports.
  FabricResult fabric_forward(SimTime now);

  // Dequeues the next packet for `out_port` (control first, then VLs
  // round-robin, standard queue and CFQ alternating) and applies marking.
  std::optional<PacketId> egress_transmit(std::uint32_t out_port, SimTime now);

  bool has_transmittable(std::uint32_t out_port) const;
  void apply_pause(std::uint32_t out_port, std::uint32_t vl, PfcFrame frame, SimTime now = 0);

  // Periodic CFT maintenance: deallocation, root clearing, persistence
  // escalation, and (when enabled) the isolation audit.
  void cft_tick(SimTime now);

  // Full-state isolation audit. Returns the number of violations found.
  std::uint64_t audit() const;

  bool link_busy(std::uint32_t port) const { return busy_[port]; }
  void set_link_busy(std::uint32_t port, bool busy) { busy_[port] = busy; }

  std::uint32_t id() const { return id_; }
  std::uint32_t port_count() const { return static_cast<std::uint32_t>(ingress_.size()); }
  std::uint32_t ingress_packets(std::uint32_t port) const { return ingress_[port].packets; }
  std::uint32_t ingress_packets(std::uint32_t port, std::uint32_t vl) const {
    return ingress_[port].vls[vl].packets;
  }
  std::uint32_t ingress_cfq_packets(std::uint32_t port) const;
  std::uint32_t egress_packets(std::uint32_t port) const { return egress_[port].packets; }
  std::uint32_t egress_cfq_packets(std::uint32_t port) const;
  std::uint64_t egress_bytes(std::uint32_t port) const { return egress_[port].bytes; }
  std::uint32_t buffered_packets() const;
  // Packets queued at an egress (standard queues or CFQs), VL by VL.
  std::vector<PacketId> egress_snapshot(std::uint32_t port, bool cfq) const;
  std::vector<PacketId> ingress_snapshot(std::uint32_t port, bool cfq) const;
  bool has_backlog() const;

  const CftTable& egress_table(std::uint32_t port) const { return egress_[port].table; }
  const CftTable& ingress_table(std::uint32_t port) const { return ingress_[port].table; }
  const EgressCoordinator& coordinator(std::uint32_t port) const { return egress_[port].coordinator; }
  const SwitchCounters& counters() const { return counters_; }
  bool pfc_paused(std::uint32_t in_port, std::uint32_t vl) const {
    return ingress_[in_port].pfc.paused(vl);
  }

 private:
  struct IngressVl {
    std::deque<PacketId> fifo;
    std::deque<PacketId> cfq;
    std::uint32_t packets = 0;
  };
  struct IngressPort {
    std::vector<IngressVl> vls;
    std::uint32_t packets = 0;
    std::uint64_t bytes = 0;
    PfcIngress pfc;
    CftTable table;
    std::uint32_t next_queue = 0;
    double read_credit = 0;
  };
  struct EgressVl {
    std::deque<PacketId> std_q;
    std::deque<PacketId> cfq;
    std::uint32_t packets = 0;
    bool next_cfq = false;
  };
  struct EgressPort {
    std::vector<EgressVl> vls;
    std::deque<PacketId> control;
    std::uint32_t packets = 0;
    std::uint32_t cfq_packets = 0;
    std::uint64_t bytes = 0;
    LinkPermission permission;
    CftTable table;
    RootDetector detector;
    EgressCoordinator coordinator;
    std::unordered_map<FlowTuple, std::uint32_t, FlowTupleHash> std_key_counts;
    std::set<FlowTuple> full_reported;
    std::uint32_t next_vl = 0;
    double credit = 0;
    SimTime last_pause = -1;  // most recent pause frame from downstream, -1 = never
  };

  // Paused now or within the persistence window: the queue is a branch of a
  // tree rooted further downstream.
  bool backpressured(const EgressPort& ep, SimTime now) const;

  void enqueue_egress(PacketId id, std::uint32_t out_port, SimTime now);
  void try_isolate(std::uint32_t out_port, const FlowTuple& tuple, SimTime now);
  void mirror_to_ingress(const FlowTuple& tuple, std::uint32_t out_port, SimTime now);
  void apply_marking(EgressPort& ep, std::uint32_t out_port, EgressVl& evl, Packet& pkt,
                     bool from_cfq);
  std::uint32_t queued_overflow_packets(const EgressPort& ep, const EgressVl& evl) const;
  void log_transition(std::uint32_t port, const std::optional<ModeTransition>& t);
  void log_cft(SimTime now, std::uint32_t port, bool ingress, CftEventKind kind, const FlowTuple& key);
  std::uint32_t cfq_limit(const EgressPort& ep) const;
  bool is_candidate(const EgressPort& ep, std::uint32_t key_packets) const;

  std::uint32_t id_;
  const MinTopology& topo_;
  SwitchConfig cfg_;
  PacketPool& pool_;
  SwitchLogs* logs_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::vector<IngressPort> ingress_;
  std::vector<EgressPort> egress_;
  std::vector<bool> busy_;
  std::uint32_t rr_input_ = 0;
  SwitchCounters counters_;
};

}  // namespace ici
