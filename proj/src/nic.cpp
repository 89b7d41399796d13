#include "ici/nic.hpp"

#include <algorithm>

namespace ici {

HostNic::HostNic(std::uint32_t id, const NicConfig& cfg, PacketPool& pool, Engine& engine)
    : id_(id),
      cfg_(cfg),
      pool_(pool),
      engine_(engine),
      notifier_(cfg.dcqcn.notification_window),
      permission_(cfg.vl_count) {}

std::uint32_t HostNic::flow_slot(const Packet& pkt) {
  if (auto it = index_.find(pkt.tuple); it != index_.end()) return it->second;
  std::uint32_t slot;
  if (!free_.empty()) {
    slot = free_.back();
    free_.pop_back();
  } else {
    slot = static_cast<std::uint32_t>(flows_.size());
    flows_.emplace_back();
  }
  Flow& f = flows_[slot];
  f.tuple = pkt.tuple;
  f.vl = pkt.vl;
  f.queue.clear();
  f.rate = initial_rate_state(cfg_.dcqcn);
  f.next_send = 0;
  f.in_use = true;
  f.active = false;
  f.timers_running = false;
  index_.emplace(pkt.tuple, slot);
  return slot;
}

void HostNic::enqueue(PacketId id) {
  const std::uint32_t slot = flow_slot(pool_[id]);
  Flow& f = flows_[slot];
  f.queue.push_back(id);
  if (!f.active) {
    f.active = true;
    active_.push_back(slot);
  }
}

void HostNic::maybe_release(std::uint32_t slot) {
  Flow& f = flows_[slot];
  if (f.active || f.timers_running || !f.queue.empty()) return;
  if (cfg_.dcqcn_enabled && !f.rate.at_line_rate(cfg_.dcqcn)) return;
  index_.erase(f.tuple);
  f.in_use = false;
  ++f.alpha_gen;
  ++f.inc_gen;
  free_.push_back(slot);
}

HostNic::Pick HostNic::next_packet(SimTime now) {
  Pick pick;
  if (!control_.empty()) {
    pick.packet = control_.front();
    control_.pop_front();
    return pick;
  }
  const std::size_t n = active_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = (rr_ + i) % n;
    const std::uint32_t slot = active_[idx];
    Flow& f = flows_[slot];
    if (!permission_.may_send(f.vl)) continue;
    if (f.next_send > now) {
      if (!pick.wake_at || f.next_send < *pick.wake_at) pick.wake_at = f.next_send;
      continue;
    }
    const PacketId pid = f.queue.front();
    f.queue.pop_front();
    const Packet& pkt = pool_[pid];
    if (cfg_.dcqcn_enabled && !f.rate.at_line_rate(cfg_.dcqcn)) {
      f.next_send = now + serialization_time(pkt.size, f.rate.current_rate);
      f.rate.bytes_since_stage += pkt.size;
      if (f.rate.bytes_since_stage >= cfg_.dcqcn.byte_counter) {
        f.rate.bytes_since_stage = 0;
        f.rate = rp_increase_tick(f.rate, cfg_.dcqcn, IncreaseTrigger::kByteCounter);
      }
    } else {
      f.next_send = now;
    }
    if (f.queue.empty()) {
      f.active = false;
      active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(idx));
      rr_ = active_.empty() ? 0 : idx % active_.size();
      maybe_release(slot);
    } else {
      rr_ = (idx + 1) % n;
    }
    pick.packet = pid;
    pick.wake_at.reset();
    return pick;
  }
  return pick;
}

void HostNic::arm(NicTimer timer, std::uint32_t slot, SimTime at) {
  Flow& f = flows_[slot];
  const std::uint32_t gen = timer == NicTimer::kAlpha ? ++f.alpha_gen : ++f.inc_gen;
  engine_.schedule(at, EventKind::kDcqcnTimer, id_, static_cast<std::uint32_t>(timer),
                   (std::uint64_t{gen} << 32) | slot);
}

void HostNic::on_becn(const FlowTuple& flow, SimTime now) {
  ++becn_received_;
  auto it = index_.find(flow);
  if (it == index_.end() || !cfg_.dcqcn_enabled) {
    ++becn_orphaned_;
    return;
  }
  const std::uint32_t slot = it->second;
  Flow& f = flows_[slot];
  f.rate = rp_on_becn(f.rate, cfg_.dcqcn);
  // Re-pace from now at the reduced rate.
  f.next_send = std::max(f.next_send, now);
  if (!f.timers_running) {
    f.timers_running = true;
    arm(NicTimer::kAlpha, slot, now + cfg_.dcqcn.alpha_timer);
  }
  arm(NicTimer::kIncrease, slot, now + cfg_.dcqcn.increase_timer);
}

void HostNic::on_timer(NicTimer timer, std::uint64_t aux, SimTime now) {
  const auto slot = static_cast<std::uint32_t>(aux & 0xffffffffu);
  const auto gen = static_cast<std::uint32_t>(aux >> 32);
  if (slot >= flows_.size()) return;
  Flow& f = flows_[slot];
  if (!f.in_use) return;
  if (timer == NicTimer::kAlpha) {
    if (gen != f.alpha_gen) return;
    f.rate = rp_alpha_tick(f.rate, cfg_.dcqcn);
    if (f.rate.at_line_rate(cfg_.dcqcn)) {
      f.timers_running = false;
      ++f.inc_gen;
      maybe_release(slot);
      return;
    }
    arm(NicTimer::kAlpha, slot, now + cfg_.dcqcn.alpha_timer);
  } else {
    if (gen != f.inc_gen) return;
    f.rate = rp_increase_tick(f.rate, cfg_.dcqcn, IncreaseTrigger::kTimer);
    if (!f.rate.at_line_rate(cfg_.dcqcn)) arm(NicTimer::kIncrease, slot, now + cfg_.dcqcn.increase_timer);
  }
}

std::optional<RateState> HostNic::rate_of(const FlowTuple& flow) const {
  auto it = index_.find(flow);
  if (it == index_.end()) return std::nullopt;
  return flows_[it->second].rate;
}

}  // namespace ici
