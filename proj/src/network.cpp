#include "ici/network.hpp"

#include <algorithm>
#include <sstream>

namespace ici {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_(cfg),
      topo_(build_min(cfg.topology)),
      sw_cfg_(cfg.switch_config()),
      nic_cfg_(cfg.nic_config()),
      metrics_(cfg.bin_width) {
  cfg_.validate();
  engine_.set_dispatcher([this](const Event& ev) { dispatch(ev); });
  dcqcn_ = uses_dcqcn(cfg_.cc_mode);
  quantum_ = serialization_time(kMtuBytes, topo_.link_rate());

  for (std::uint32_t s = 0; s < topo_.switch_count(); ++s)
    switches_.push_back(std::make_unique<Switch>(s, topo_, sw_cfg_, pool_, derive_seed(cfg_.seed, 1000 + s), &logs_));
  for (std::uint32_t h = 0; h < topo_.terminals(); ++h)
    nics_.push_back(std::make_unique<HostNic>(h, nic_cfg_, pool_, engine_));
  last_tick_.assign(switches_.size(), -quantum_);
  tick_pending_.assign(switches_.size(), false);

  roles_ = assign_roles(topo_.terminals(), cfg_.root_count() > 0 ? cfg_.incast_fraction : 0.0,
                        cfg_.root_count(), cfg_.seed);
  std::vector<std::uint32_t> everyone(topo_.terminals());
  for (std::uint32_t i = 0; i < everyone.size(); ++i) everyone[i] = i;

  for (std::size_t i = 0; i < cfg_.workloads.size(); ++i) {
    const WorkloadSpec& w = cfg_.workloads[i];
    const auto seed = derive_seed(cfg_.seed, i);
    const std::uint64_t first_id = (std::uint64_t{i} + 1) << 40;
    switch (w.kind) {
      case WorkloadKind::kUniform:
        add_stream(gen_uniform(w, roles_.background, topo_.terminals(), topo_.link_rate(), seed));
        break;
      case WorkloadKind::kIncastTree: {
        std::vector<std::uint32_t> roots(roles_.roots.begin(), roles_.roots.begin() + w.roots);
        add_stream(gen_incast_tree(w, roles_.incast_senders, roots, topo_.link_rate()));
        break;
      }
      case WorkloadKind::kMessageMix:
        add_stream(gen_message_mix(w, FlowSizeCdf::load(w.cdf_path), roles_.background, topo_.terminals(),
                                   roles_.roots, topo_.link_rate(), seed, first_id));
        break;
      case WorkloadKind::kTrace:
        add_stream(load_trace(w.trace_path, w.dilation, topo_.terminals(), first_id));
        break;
    }
  }
}

void Simulation::add_stream(std::unique_ptr<InjectionStream> stream) {
  streams_.push_back(std::move(stream));
  pending_.emplace_back();
  ++live_streams_;
  if (started_) pull_next(static_cast<std::uint32_t>(streams_.size() - 1));
}

void Simulation::pull_next(std::uint32_t s) {
  pending_[s] = streams_[s]->next();
  if (!pending_[s]) {
    --live_streams_;
    return;
  }
  engine_.schedule(std::max(pending_[s]->time, engine_.now()), EventKind::kInjection, s);
}

bool Simulation::finished() const { return live_streams_ == 0 && pool_.live() == 0; }

void Simulation::check_finished() {
  if (finished()) engine_.stop();
}

void Simulation::dispatch(const Event& ev) {
  switch (ev.kind) {
    case EventKind::kInjection: on_injection(ev.target); break;
    case EventKind::kPacketArrival:
      if (ev.target & kHostFlag) on_host_arrival(ev.target & ~kHostFlag, static_cast<PacketId>(ev.aux));
      else on_switch_arrival(ev.target, ev.port, static_cast<PacketId>(ev.aux));
      break;
    case EventKind::kTransmitComplete:
      if (ev.target & kHostFlag) {
        const auto h = ev.target & ~kHostFlag;
        nics_[h]->set_busy(false);
        try_nic_send(h);
      } else {
        switches_[ev.target]->set_link_busy(ev.port, false);
        try_port_send(ev.target, ev.port);
      }
      break;
    case EventKind::kPauseFrame: on_pause(ev.target, ev.port, ev.aux); break;
    case EventKind::kFabricTick: on_fabric_tick(ev.target); break;
    case EventKind::kNicWake: {
      auto& w = nics_[ev.target]->scheduled_wake();
      if (w && *w == ev.fire_time) w.reset();
      try_nic_send(ev.target);
      break;
    }
    case EventKind::kDcqcnTimer:
      nics_[ev.target]->on_timer(static_cast<NicTimer>(ev.port), ev.aux, ev.fire_time);
      try_nic_send(ev.target);
      break;
    case EventKind::kCftTimer: on_cft_timer(); break;
    case EventKind::kSample: on_sample(); break;
  }
}

void Simulation::on_injection(std::uint32_t s) {
  const Injection inj = *pending_[s];
  const SimTime now = engine_.now();
  const std::uint64_t packets = std::max<std::uint64_t>(1, (inj.size + kMtuBytes - 1) / kMtuBytes);
  if (inj.msg_id != 0) metrics_.on_message_start(inj.msg_id, inj.size, packets, now);
  metrics_.on_injected(packets);
  std::uint64_t left = inj.size;
  HostNic& nic = *nics_[inj.src];
  for (std::uint64_t i = 0; i < packets; ++i) {
    Packet p;
    p.kind = PacketKind::kData;
    p.traffic = inj.traffic;
    p.tuple = FlowTuple{inj.src, inj.dst, inj.src_port, kRoceDstPort};
    p.route_dst = inj.dst;
    p.vl = inj.vl;
    p.size = static_cast<std::uint32_t>(std::min<std::uint64_t>(left, kMtuBytes));
    if (p.size == 0) p.size = 1;
    left -= std::min<std::uint64_t>(left, kMtuBytes);
    p.msg_id = inj.msg_id;
    p.inject_time = now;
    nic.enqueue(pool_.acquire(p));
  }
  try_nic_send(inj.src);
  pull_next(s);
}

void Simulation::try_nic_send(std::uint32_t h) {
  HostNic& nic = *nics_[h];
  if (nic.busy()) return;
  const SimTime now = engine_.now();
  const auto pick = nic.next_packet(now);
  if (pick.packet) {
    const Packet& pkt = pool_[*pick.packet];
    const SimTime ser = serialization_time(pkt.size, topo_.link_rate());
    const LinkEnd& link = topo_.terminal_link(h);
    nic.set_busy(true);
    engine_.schedule(now + ser, EventKind::kTransmitComplete, h | kHostFlag);
    engine_.schedule(now + ser + topo_.link_delay(), EventKind::kPacketArrival, link.peer.id, link.peer_port,
                     *pick.packet);
    return;
  }
  if (pick.wake_at) {
    auto& w = nic.scheduled_wake();
    if (!w || *pick.wake_at < *w) {
      w = *pick.wake_at;
      engine_.schedule(*pick.wake_at, EventKind::kNicWake, h);
    }
  }
}

void Simulation::try_port_send(std::uint32_t s, std::uint32_t port) {
  Switch& sw = *switches_[s];
  if (sw.link_busy(port)) return;
  const SimTime now = engine_.now();
  const auto pid = sw.egress_transmit(port, now);
  if (!pid) return;
  const Packet& pkt = pool_[*pid];
  const SimTime ser = serialization_time(pkt.size, topo_.link_rate());
  const LinkEnd& link = topo_.switch_at(s).ports[port];
  sw.set_link_busy(port, true);
  engine_.schedule(now + ser, EventKind::kTransmitComplete, s, port);
  const std::uint32_t target = link.peer.type == NodeType::kTerminal ? (link.peer.id | kHostFlag) : link.peer.id;
  engine_.schedule(now + ser + topo_.link_delay(), EventKind::kPacketArrival, target, link.peer_port, *pid);
  // Freed egress space may unblock the fabric.
  if (sw.has_backlog()) schedule_fabric(s);
}

void Simulation::schedule_fabric(std::uint32_t s) {
  if (tick_pending_[s]) return;
  tick_pending_[s] = true;
  engine_.schedule(std::max(engine_.now(), last_tick_[s] + quantum_), EventKind::kFabricTick, s);
}

void Simulation::send_pause(std::uint32_t s, std::uint32_t in_port, std::uint32_t vl, PfcFrame frame) {
  const SimTime now = engine_.now();
  metrics_.on_pfc(s, in_port, vl, frame == PfcFrame::kPause, now);
  const LinkEnd& link = topo_.switch_at(s).ports[in_port];
  const std::uint32_t target = link.peer.type == NodeType::kTerminal ? (link.peer.id | kHostFlag) : link.peer.id;
  const std::uint64_t aux = (std::uint64_t{vl} << 1) | (frame == PfcFrame::kPause ? 1u : 0u);
  engine_.schedule(now + topo_.link_delay(), EventKind::kPauseFrame, target, link.peer_port, aux);
}

void Simulation::on_pause(std::uint32_t target, std::uint32_t port, std::uint64_t aux) {
  const auto vl = static_cast<std::uint32_t>(aux >> 1);
  const PfcFrame frame = (aux & 1) ? PfcFrame::kPause : PfcFrame::kResume;
  if (target & kHostFlag) {
    const auto h = target & ~kHostFlag;
    nics_[h]->apply_pause(vl, frame);
    if (frame == PfcFrame::kResume) try_nic_send(h);
  } else {
    switches_[target]->apply_pause(port, vl, frame, engine_.now());
    if (frame == PfcFrame::kResume) try_port_send(target, port);
  }
}

void Simulation::on_switch_arrival(std::uint32_t s, std::uint32_t port, PacketId pid) {
  Switch& sw = *switches_[s];
  const auto receipt = sw.ingress_accept(pid, port, engine_.now());
  if (receipt.control_out_port) {
    try_port_send(s, *receipt.control_out_port);
    return;
  }
  if (receipt.frame) send_pause(s, port, pool_[pid].vl, *receipt.frame);
  schedule_fabric(s);
}

void Simulation::on_fabric_tick(std::uint32_t s) {
  tick_pending_[s] = false;
  last_tick_[s] = engine_.now();
  Switch& sw = *switches_[s];
  const auto result = sw.fabric_forward(engine_.now());
  for (const auto& sig : result.signals) send_pause(s, sig.in_port, sig.vl, sig.frame);
  for (auto p : result.ready_ports) try_port_send(s, p);
  if (result.backlog) schedule_fabric(s);
}

void Simulation::on_host_arrival(std::uint32_t h, PacketId pid) {
  const SimTime now = engine_.now();
  Packet& pkt = pool_[pid];
  HostNic& nic = *nics_[h];
  if (pkt.kind == PacketKind::kBecn) {
    nic.on_becn(pkt.tuple, now);
    pool_.release(pid);
    try_nic_send(h);
    check_finished();
    return;
  }
  pkt.deliver_time = now;
  metrics_.on_delivered(pkt, now);
  if (on_deliver) on_deliver(pkt, now);
  if (dcqcn_ && pkt.ecn == Ecn::kCongestionExperienced && nic.on_marked_delivery(pkt.tuple, now)) {
    Packet becn;
    becn.kind = PacketKind::kBecn;
    becn.traffic = pkt.traffic;
    becn.tuple = pkt.tuple;
    becn.route_dst = pkt.tuple.src_node;
    becn.vl = pkt.vl;
    becn.size = kControlPacketBytes;
    becn.ecn = Ecn::kNotCapable;
    becn.inject_time = now;
    metrics_.on_becn(pkt.tuple, pkt.hops, now);
    nic.push_control(pool_.acquire(becn));
    pool_.release(pid);
    try_nic_send(h);
    return;
  }
  pool_.release(pid);
  check_finished();
}

void Simulation::on_cft_timer() {
  const SimTime now = engine_.now();
  for (auto& sw : switches_) sw->cft_tick(now);
  if (!finished()) engine_.schedule(now + std::max<SimTime>(1, cfg_.ci.residency / 4), EventKind::kCftTimer, 0);
}

void Simulation::on_sample() {
  const SimTime now = engine_.now();
  std::uint32_t buffered = 0, entries = 0;
  for (auto& sw : switches_) {
    buffered += sw->buffered_packets();
    for (std::uint32_t p = 0; p < sw->port_count(); ++p) entries += static_cast<std::uint32_t>(sw->egress_table(p).size());
  }
  metrics_.on_sample(buffered, entries, now);
  if (!finished()) engine_.schedule(now + cfg_.sample_period, EventKind::kSample, 0);
}

RunReport Simulation::run() {
  started_ = true;
  for (std::uint32_t s = 0; s < streams_.size(); ++s)
    if (!pending_[s]) pull_next(s);
  if (sw_cfg_.ci.enabled) engine_.schedule(std::max<SimTime>(1, cfg_.ci.residency / 4), EventKind::kCftTimer, 0);
  engine_.schedule(0, EventKind::kSample, 0);

  RunReport& r = metrics_.report();
  r.scenario = cfg_.name;
  r.cc_mode = to_string(cfg_.cc_mode);
  r.seed = cfg_.seed;
  try {
    engine_.run(cfg_.max_time);
    if (!finished()) {
      r.completed = false;
      std::ostringstream os;
      os << "max_time reached with " << pool_.live() << " packets in flight";
      r.failure = os.str();
    }
  } catch (const LosslessViolation& e) {
    r.completed = false;
    r.drop_count = 1;
    r.failure = e.what();
  }

  for (const auto& sw : switches_) {
    const auto& c = sw->counters();
    r.marks_plain += c.marks_plain;
    r.marks_suppressed += c.marks_suppressed;
    r.marks_targeted += c.marks_targeted;
    r.marks_in_gated_modes += c.marks_in_gated_modes;
    r.victim_mark_violations += c.victim_mark_violations;
    r.table_full_events += c.table_full_events;
    r.escalations += c.escalations;
    r.root_events += c.root_events;
    r.audit_checks += c.audit_checks;
    r.audit_violations += c.audit_violations;
    r.max_ingress_packets = std::max(r.max_ingress_packets, c.max_ingress_packets);
    r.max_egress_bytes = std::max(r.max_egress_bytes, c.max_egress_bytes);
    for (std::uint32_t p = 0; p < sw->port_count(); ++p) r.cft_allocations += sw->egress_table(p).allocations();
  }
  r.cft_events = logs_.cft;
  r.mode_events = logs_.modes;
  r.events_dispatched = engine_.dispatched();
  r.trace_digest = engine_.trace_digest();
  metrics_.finalize(engine_.now(), topo_.link_rate());
  return r;
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  return sim.run();
}

}  // namespace ici
