#include "ici/dcqcn.hpp"

#include <algorithm>

#include "ici/topology.hpp"

namespace ici {

void EcnMarkerConfig::validate(double egress_capacity_packets) const {
  if (!(k_min >= 0 && k_min < k_max && k_max <= egress_capacity_packets))
    throw ConfigError("ecn: require 0 <= k_min < k_max <= egress capacity in packets");
  if (!(p_max > 0 && p_max <= 1)) throw ConfigError("ecn: p_max must be in (0, 1]");
}

double mark_probability(const EcnMarkerConfig& cfg, double occupancy) {
  if (occupancy <= cfg.k_min) return 0.0;
  if (occupancy >= cfg.k_max) return cfg.p_max;
  return cfg.p_max * (occupancy - cfg.k_min) / (cfg.k_max - cfg.k_min);
}

void DcqcnParams::validate() const {
  if (!(g > 0 && g <= 1)) throw ConfigError("dcqcn: g must be in (0, 1]");
  if (notification_window <= 0 || alpha_timer <= 0 || increase_timer <= 0)
    throw ConfigError("dcqcn: timers must be positive");
  if (byte_counter == 0) throw ConfigError("dcqcn: byte_counter must be positive");
  if (!(min_rate > 0 && min_rate <= link_rate))
    throw ConfigError("dcqcn: min_rate must be in (0, link rate]");
  if (rate_ai <= 0) throw ConfigError("dcqcn: rate_ai must be positive");
}

RateState initial_rate_state(const DcqcnParams& p) {
  RateState s;
  s.current_rate = p.link_rate;
  s.target_rate = p.link_rate;
  s.alpha = 1.0;
  return s;
}

RateState rp_on_becn(RateState s, const DcqcnParams& p) {
  s.target_rate = s.current_rate;
  s.current_rate = std::max(p.min_rate, s.current_rate * (1.0 - s.alpha / 2.0));
  s.alpha = (1.0 - p.g) * s.alpha + p.g;
  s.timer_stage = 0;
  s.byte_stage = 0;
  s.bytes_since_stage = 0;
  s.becn_since_alpha_tick = true;
  ++s.becn_rx_count;
  return s;
}

RateState rp_increase_tick(RateState s, const DcqcnParams& p, IncreaseTrigger trigger) {
  const bool fast = std::max(s.timer_stage, s.byte_stage) < p.fast_recovery_stages;
  if (trigger == IncreaseTrigger::kTimer)
    ++s.timer_stage;
  else
    ++s.byte_stage;
  if (!fast) s.target_rate = std::min(p.link_rate, s.target_rate + p.rate_ai);
  s.current_rate = std::min(p.link_rate, (s.current_rate + s.target_rate) / 2.0);
  // Snap the asymptotic midpoint sequence once it is within 0.1% of line rate.
  if (s.target_rate >= p.link_rate && p.link_rate - s.current_rate < 1e-3 * p.link_rate)
    s.current_rate = p.link_rate;
  return s;
}

RateState rp_alpha_tick(RateState s, const DcqcnParams& p) {
  if (!s.becn_since_alpha_tick) s.alpha *= (1.0 - p.g);
  s.becn_since_alpha_tick = false;
  return s;
}

bool BecnNotifier::nic_on_marked_packet(const FlowTuple& flow, SimTime now) {
  auto [it, inserted] = last_sent_.try_emplace(flow, now);
  if (inserted) return true;
  if (now - it->second >= window_) {
    it->second = now;
    return true;
  }
  ++suppressed_;
  return false;
}

}  // namespace ici
