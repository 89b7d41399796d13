#include "ici/switch_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ici {

Switch::Switch(std::uint32_t id, const MinTopology& topo, const SwitchConfig& cfg, PacketPool& pool,
               std::uint64_t seed, SwitchLogs* logs)
    : id_(id), topo_(topo), cfg_(cfg), pool_(pool), logs_(logs), rng_(seed) {
  const auto ports = static_cast<std::uint32_t>(topo.switch_at(id).ports.size());
  const auto thresholds = resolve_thresholds(cfg.pfc, cfg.vl_count);
  ingress_.resize(ports);
  egress_.resize(ports);
  busy_.assign(ports, false);
  for (auto& ip : ingress_) {
    ip.vls.resize(cfg.vl_count);
    ip.pfc = PfcIngress(thresholds);
    ip.table = CftTable(cfg.ci.capacity, cfg.ci.key_mode, cfg.ci.residency);
  }
  for (auto& ep : egress_) {
    ep.vls.resize(cfg.vl_count);
    ep.permission = LinkPermission(cfg.vl_count);
    ep.table = CftTable(cfg.ci.capacity, cfg.ci.key_mode, cfg.ci.residency);
    ep.coordinator = EgressCoordinator(cfg.coordinator);
  }
}

Switch::IngressReceipt Switch::ingress_accept(PacketId id, std::uint32_t in_port, SimTime now) {
  (void)now;
  Packet& pkt = pool_[id];
  ++pkt.hops;
  IngressReceipt receipt;
  if (pkt.is_control()) {
    // Control frames skip the data buffers and go out at strict priority.
    const std::uint32_t out = topo_.route(id_, pkt.route_dst);
    egress_[out].control.push_back(id);
    receipt.control_out_port = out;
    return receipt;
  }

  IngressPort& ip = ingress_[in_port];
  if (ip.packets + 1 > cfg_.pfc.port_budget ||
      ip.bytes + egress_[in_port].bytes + pkt.size > cfg_.port_partition) {
    std::ostringstream os;
    os << "lossless violation at switch " << id_ << " port " << in_port << ": " << ip.packets
       << " packets queued, budget " << cfg_.pfc.port_budget;
    throw LosslessViolation(os.str());
  }
  IngressVl& vl = ip.vls[pkt.vl];
  CftEntry* entry = cfg_.ci.enabled ? ip.table.match_packet(pkt.tuple) : nullptr;
  if (entry) {
    vl.cfq.push_back(id);
    ip.table.on_cfq_enqueue(*entry);
    receipt.isolated = true;
  } else {
    vl.fifo.push_back(id);
  }
  ++vl.packets;
  ++ip.packets;
  ip.bytes += pkt.size;
  counters_.max_ingress_packets = std::max(counters_.max_ingress_packets, ip.packets);
  if (cfg_.pfc.enabled) receipt.frame = ip.pfc.on_occupancy_change(pkt.vl, vl.packets);
  return receipt;
}

std::uint32_t Switch::cfq_limit(const EgressPort& ep) const {
  const auto cap_packets = static_cast<std::uint32_t>(cfg_.egress_cap / cfg_.mtu);
  return std::min<std::uint32_t>(
      cap_packets, static_cast<std::uint32_t>(ep.table.size()) * cfg_.ci.cfq_entry_packets);
}

bool Switch::is_candidate(const EgressPort& ep, std::uint32_t key_packets) const {
  const auto backlog = ep.packets - ep.cfq_packets;
  return key_packets >= cfg_.ci.candidate_min_packets &&
         key_packets >= cfg_.ci.candidate_min_share * backlog;
}

Switch::FabricResult Switch::fabric_forward(SimTime now) {
  FabricResult result;
  const auto ports = port_count();
  const double refill = cfg_.speedup * cfg_.mtu;
  const double cap = std::ceil(cfg_.speedup) * cfg_.mtu;
  for (auto& ep : egress_) ep.credit = std::min(cap, ep.credit + refill);
  for (auto& ip : ingress_) ip.read_credit = std::min(cap, ip.read_credit + refill);

  const auto queues_per_port = cfg_.vl_count * 2;
  std::vector<bool> ready(ports, false);
  std::uint32_t last_served = rr_input_ == 0 ? ports - 1 : rr_input_ - 1;
  bool served_any = false;
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::uint32_t i = 0; i < ports; ++i) {
      const std::uint32_t in = (rr_input_ + i) % ports;
      IngressPort& ip = ingress_[in];
      if (ip.packets == 0) continue;
      for (std::uint32_t k = 0; k < queues_per_port; ++k) {
        const std::uint32_t q = (ip.next_queue + k) % queues_per_port;
        IngressVl& ivl = ip.vls[q / 2];
        auto& dq = (q % 2 == 0) ? ivl.fifo : ivl.cfq;
        if (dq.empty()) continue;
        const PacketId pid = dq.front();
        const Packet& pkt = pool_[pid];
        if (ip.read_credit < pkt.size) break;
        const std::uint32_t out = topo_.route(id_, pkt.route_dst);
        EgressPort& ep = egress_[out];
        if (ep.credit < pkt.size) continue;
        if (ep.bytes + pkt.size > cfg_.egress_cap) continue;
        if (cfg_.ci.enabled) {
          if (ep.table.match_packet(pkt.tuple) && ep.cfq_packets >= cfq_limit(ep)) continue;
        }
        dq.pop_front();
        if (q % 2 == 1) ip.table.on_cfq_dequeue(pkt.tuple);
        --ivl.packets;
        --ip.packets;
        ip.bytes -= pkt.size;
        ip.read_credit -= pkt.size;
        ep.credit -= pkt.size;
        if (cfg_.pfc.enabled) {
          if (auto frame = ip.pfc.on_occupancy_change(q / 2, ivl.packets))
            result.signals.push_back(PfcSignal{in, q / 2, *frame});
        }
        enqueue_egress(pid, out, now);
        ready[out] = true;
        ip.next_queue = (q + 1) % queues_per_port;
        ++result.moved;
        ++counters_.moved;
        last_served = in;
        served_any = true;
        progress = true;
        break;
      }
    }
  }
  if (served_any) rr_input_ = (last_served + 1) % ports;
  for (std::uint32_t p = 0; p < ports; ++p)
    if (ready[p]) result.ready_ports.push_back(p);
  result.backlog = has_backlog();
  return result;
}

void Switch::enqueue_egress(PacketId id, std::uint32_t out, SimTime now) {
  Packet& pkt = pool_[id];
  EgressPort& ep = egress_[out];
  EgressVl& evl = ep.vls[pkt.vl];
  CftEntry* entry = cfg_.ci.enabled ? ep.table.match_packet(pkt.tuple) : nullptr;
  FlowTuple key{};
  if (entry) {
    evl.cfq.push_back(id);
    ep.table.on_cfq_enqueue(*entry);
    ++ep.cfq_packets;
  } else {
    evl.std_q.push_back(id);
    if (cfg_.ci.enabled) {
      key = ep.table.key_of(pkt.tuple);
      ++ep.std_key_counts[key];
    }
  }
  ++evl.packets;
  ++ep.packets;
  ep.bytes += pkt.size;
  counters_.max_egress_bytes = std::max(counters_.max_egress_bytes, ep.bytes);
  counters_.max_egress_packets = std::max(counters_.max_egress_packets, ep.packets);

  if (!cfg_.ci.enabled) return;
  const bool eligible = cfg_.ci.detect_at_branches || ep.detector.active() || !backpressured(ep, now);
  if (eligible && ep.detector.detect_root(ep.packets, cfg_.ci.detection_threshold)) {
    ++counters_.root_events;
    if (cfg_.marking == MarkingPolicy::kCoordinated) log_transition(out, ep.coordinator.on_root_event(now));
    std::vector<std::pair<std::uint32_t, FlowTuple>> candidates;
    for (const auto& [k, count] : ep.std_key_counts)
      if (is_candidate(ep, count)) candidates.emplace_back(count, k);
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    // Keys are wildcard-expanded already; re-derive a representative tuple.
    for (const auto& [count, k] : candidates) {
      (void)count;
      try_isolate(out, k, now);
    }
  } else if (ep.detector.active() && !entry) {
    auto it = ep.std_key_counts.find(key);
    if (it != ep.std_key_counts.end() && is_candidate(ep, it->second)) try_isolate(out, pkt.tuple, now);
  }
}

void Switch::try_isolate(std::uint32_t out, const FlowTuple& tuple, SimTime now) {
  EgressPort& ep = egress_[out];
  // cft_key is idempotent, so a wildcard key passed as `tuple` maps to itself.
  const FlowTuple key = ep.table.key_of(tuple);
  const auto result = ep.table.allocate_entry(key, RootLocator{id_, out}, now);
  if (result == AllocationResult::kAlreadyPresent) return;
  if (result == AllocationResult::kTableFull) {
    if (!ep.full_reported.insert(key).second) return;
    ++counters_.table_full_events;
    log_cft(now, out, false, CftEventKind::kTableFull, key);
    if (cfg_.marking == MarkingPolicy::kCoordinated) {
      auto t = ep.coordinator.on_escalation(EscalationCause::kTableFull, now, key);
      if (t) ++counters_.escalations;
      log_transition(out, t);
    }
    return;
  }
  log_cft(now, out, false, CftEventKind::kAllocate, key);
  CftEntry* entry = ep.table.match_packet(key);
  // Move already-queued matching packets so no standard queue holds one.
  for (auto& evl : ep.vls) {
    std::deque<PacketId> keep;
    for (PacketId pid : evl.std_q) {
      if (ep.table.key_of(pool_[pid].tuple) == key) {
        evl.cfq.push_back(pid);
        ep.table.on_cfq_enqueue(*entry);
        ++ep.cfq_packets;
      } else {
        keep.push_back(pid);
      }
    }
    evl.std_q.swap(keep);
  }
  ep.std_key_counts.erase(key);
  if (cfg_.ci.mirror_ingress) mirror_to_ingress(key, out, now);
}

void Switch::mirror_to_ingress(const FlowTuple& key, std::uint32_t out, SimTime now) {
  for (std::uint32_t in = 0; in < port_count(); ++in) {
    IngressPort& ip = ingress_[in];
    const auto result = ip.table.allocate_entry(key, RootLocator{id_, out}, now);
    if (result == AllocationResult::kTableFull) {
      log_cft(now, in, true, CftEventKind::kTableFull, key);
      continue;
    }
    if (result != AllocationResult::kAllocated) continue;
    log_cft(now, in, true, CftEventKind::kAllocate, key);
    CftEntry* entry = ip.table.match_packet(key);
    for (auto& ivl : ip.vls) {
      std::deque<PacketId> keep;
      for (PacketId pid : ivl.fifo) {
        if (ip.table.key_of(pool_[pid].tuple) == key) {
          ivl.cfq.push_back(pid);
          ip.table.on_cfq_enqueue(*entry);
        } else {
          keep.push_back(pid);
        }
      }
      ivl.fifo.swap(keep);
    }
  }
}

std::uint32_t Switch::queued_overflow_packets(const EgressPort& ep, const EgressVl& evl) const {
  std::uint32_t n = 0;
  if (ep.coordinator.overflow_keys().empty()) return 0;
  for (PacketId pid : evl.std_q)
    if (ep.coordinator.overflow_matches(ep.table.key_of(pool_[pid].tuple))) ++n;
  return n;
}

void Switch::apply_marking(EgressPort& ep, std::uint32_t out, EgressVl& evl, Packet& pkt,
                           bool from_cfq) {
  (void)out;
  if (cfg_.marking == MarkingPolicy::kNone || pkt.ecn == Ecn::kNotCapable) return;
  const double u = uniform_(rng_);
  if (cfg_.marking == MarkingPolicy::kPlain) {
    if (u < mark_probability(cfg_.ecn, evl.packets)) {
      pkt.mark_ce();
      ++counters_.marks_plain;
    }
    return;
  }
  const CoordinatorMode mode = ep.coordinator.mode();
  GateInput in;
  in.matches_cft_entry = from_cfq || ep.table.match_packet(pkt.tuple) != nullptr;
  in.matches_overflow = ep.coordinator.overflow_matches(ep.table.key_of(pkt.tuple));
  in.total_occupancy = evl.packets;
  in.uniform_draw = u;
  if (mode == CoordinatorMode::kDelegating) {
    std::uint32_t cfq_in_vl = static_cast<std::uint32_t>(evl.cfq.size()) + (from_cfq ? 1u : 0u);
    in.congesting_occupancy = cfq_in_vl + queued_overflow_packets(ep, evl) +
                              (!from_cfq && in.matches_overflow ? 1u : 0u);
  }
  const auto before_plain = ep.coordinator.plain_marks();
  const auto before_suppressed = ep.coordinator.suppressed_marks();
  const auto before_targeted = ep.coordinator.targeted_marks();
  if (ep.coordinator.marking_gate(cfg_.ecn, in) == MarkDecision::kMark) {
    pkt.mark_ce();
    if (mode != CoordinatorMode::kQuiescent) {
      ++counters_.marks_in_gated_modes;
      if (!in.matches_cft_entry && !in.matches_overflow) ++counters_.victim_mark_violations;
    }
  }
  counters_.marks_plain += ep.coordinator.plain_marks() - before_plain;
  counters_.marks_suppressed += ep.coordinator.suppressed_marks() - before_suppressed;
  counters_.marks_targeted += ep.coordinator.targeted_marks() - before_targeted;
}

std::optional<PacketId> Switch::egress_transmit(std::uint32_t out, SimTime now) {
  (void)now;
  EgressPort& ep = egress_[out];
  if (!ep.control.empty()) {
    const PacketId pid = ep.control.front();
    ep.control.pop_front();
    return pid;
  }
  for (std::uint32_t i = 0; i < cfg_.vl_count; ++i) {
    const std::uint32_t v = (ep.next_vl + i) % cfg_.vl_count;
    EgressVl& evl = ep.vls[v];
    if (evl.packets == 0 || !ep.permission.may_send(v)) continue;
    bool from_cfq;
    if (!evl.std_q.empty() && !evl.cfq.empty()) {
      from_cfq = evl.next_cfq;
      evl.next_cfq = !evl.next_cfq;
    } else {
      from_cfq = !evl.cfq.empty();
    }
    auto& dq = from_cfq ? evl.cfq : evl.std_q;
    const PacketId pid = dq.front();
    dq.pop_front();
    Packet& pkt = pool_[pid];
    apply_marking(ep, out, evl, pkt, from_cfq);
    if (from_cfq) {
      ep.table.on_cfq_dequeue(pkt.tuple);
      --ep.cfq_packets;
    } else if (cfg_.ci.enabled) {
      auto it = ep.std_key_counts.find(ep.table.key_of(pkt.tuple));
      if (it != ep.std_key_counts.end() && --it->second == 0) ep.std_key_counts.erase(it);
    }
    --evl.packets;
    --ep.packets;
    ep.bytes -= pkt.size;
    ep.next_vl = (v + 1) % cfg_.vl_count;
    return pid;
  }
  return std::nullopt;
}

bool Switch::has_transmittable(std::uint32_t out) const {
  const EgressPort& ep = egress_[out];
  if (!ep.control.empty()) return true;
  for (std::uint32_t v = 0; v < cfg_.vl_count; ++v)
    if (ep.vls[v].packets > 0 && ep.permission.may_send(v)) return true;
  return false;
}

void Switch::apply_pause(std::uint32_t out, std::uint32_t vl, PfcFrame frame, SimTime now) {
  egress_[out].permission.apply_pause(frame, vl);
  if (frame == PfcFrame::kPause) egress_[out].last_pause = now;
}

bool Switch::backpressured(const EgressPort& ep, SimTime now) const {
  for (std::uint32_t v = 0; v < cfg_.vl_count; ++v)
    if (!ep.permission.may_send(v)) return true;
  return ep.last_pause >= 0 && now - ep.last_pause < cfg_.coordinator.persistence_window;
}

void Switch::cft_tick(SimTime now) {
  if (!cfg_.ci.enabled) return;
  for (std::uint32_t p = 0; p < port_count(); ++p) {
    EgressPort& ep = egress_[p];
    for (const auto& e : ep.table.deallocate_tick(now)) log_cft(now, p, false, CftEventKind::kDeallocate, e.key);
    if (ep.detector.active() && ep.table.empty() && ep.packets < cfg_.ci.detection_threshold) {
      ep.detector.clear();
      ep.full_reported.clear();
      if (cfg_.marking == MarkingPolicy::kCoordinated)
        log_transition(p, ep.coordinator.on_root_cleared(false, ep.packets,
                                                         cfg_.ci.detection_threshold, now));
    }
    // Isolation has not contained the root if the non-isolated share of the
    // queue is still over threshold when the window closes. A backpressured
    // queue is a branch; the downstream root owns that decision.
    if (cfg_.marking == MarkingPolicy::kCoordinated && ep.coordinator.persistence_due(now) &&
        !backpressured(ep, now) &&
        (ep.packets - ep.cfq_packets >= cfg_.ci.detection_threshold ||
         (cfg_.coordinator.escalate_on_saturated_cfq && ep.cfq_packets > 0 &&
          ep.cfq_packets >= cfq_limit(ep)))) {
      auto t = ep.coordinator.on_escalation(EscalationCause::kPersistence, now);
      if (t) ++counters_.escalations;
      log_transition(p, t);
    }
    IngressPort& ip = ingress_[p];
    for (const auto& e : ip.table.deallocate_tick(now)) log_cft(now, p, true, CftEventKind::kDeallocate, e.key);
  }
  if (cfg_.audit) {
    ++counters_.audit_checks;
    counters_.audit_violations += audit();
  }
}

std::uint64_t Switch::audit() const {
  std::uint64_t violations = 0;
  for (std::uint32_t p = 0; p < port_count(); ++p) {
    const EgressPort& ep = egress_[p];
    std::unordered_map<FlowTuple, std::int64_t, FlowTupleHash> recount;
    std::uint32_t cfq_total = 0;
    for (const auto& evl : ep.vls) {
      for (PacketId pid : evl.cfq) {
        const auto* e = ep.table.match_packet(pool_[pid].tuple);
        if (!e) ++violations;
        else ++recount[e->key];
        ++cfq_total;
      }
      for (PacketId pid : evl.std_q)
        if (ep.table.match_packet(pool_[pid].tuple)) ++violations;
    }
    if (cfq_total != ep.cfq_packets) ++violations;
    for (const auto& e : ep.table.entries())
      if (recount[e.key] != e.live_packet_counter) ++violations;

    const IngressPort& ip = ingress_[p];
    std::unordered_map<FlowTuple, std::int64_t, FlowTupleHash> in_recount;
    for (const auto& ivl : ip.vls) {
      for (PacketId pid : ivl.cfq) {
        const auto* e = ip.table.match_packet(pool_[pid].tuple);
        if (!e) ++violations;
        else ++in_recount[e->key];
      }
      for (PacketId pid : ivl.fifo)
        if (ip.table.match_packet(pool_[pid].tuple)) ++violations;
    }
    for (const auto& e : ip.table.entries())
      if (in_recount[e.key] != e.live_packet_counter) ++violations;

    if (ep.coordinator.mode() == CoordinatorMode::kQuiescent && !ep.table.empty() &&
        cfg_.marking == MarkingPolicy::kCoordinated)
      ++violations;
  }
  return violations;
}

std::uint32_t Switch::ingress_cfq_packets(std::uint32_t port) const {
  std::uint32_t n = 0;
  for (const auto& v : ingress_[port].vls) n += static_cast<std::uint32_t>(v.cfq.size());
  return n;
}

std::uint32_t Switch::egress_cfq_packets(std::uint32_t port) const { return egress_[port].cfq_packets; }

std::vector<PacketId> Switch::egress_snapshot(std::uint32_t port, bool cfq) const {
  std::vector<PacketId> out;
  for (const auto& v : egress_[port].vls) {
    const auto& q = cfq ? v.cfq : v.std_q;
    out.insert(out.end(), q.begin(), q.end());
  }
  return out;
}

std::vector<PacketId> Switch::ingress_snapshot(std::uint32_t port, bool cfq) const {
  std::vector<PacketId> out;
  for (const auto& v : ingress_[port].vls) {
    const auto& q = cfq ? v.cfq : v.fifo;
    out.insert(out.end(), q.begin(), q.end());
  }
  return out;
}

std::uint32_t Switch::buffered_packets() const {
  std::uint32_t n = 0;
  for (const auto& ip : ingress_) n += ip.packets;
  for (const auto& ep : egress_) n += ep.packets;
  return n;
}

bool Switch::has_backlog() const {
  for (const auto& ip : ingress_)
    if (ip.packets > 0) return true;
  return false;
}

void Switch::log_transition(std::uint32_t port, const std::optional<ModeTransition>& t) {
  if (t && logs_) logs_->modes.push_back(ModeEvent{id_, port, *t});
}

void Switch::log_cft(SimTime now, std::uint32_t port, bool ingress, CftEventKind kind,
                     const FlowTuple& key) {
  if (logs_) logs_->cft.push_back(CftEvent{now, id_, port, ingress, kind, key});
}

}  // namespace ici
