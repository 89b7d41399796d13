#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace ici {

struct PfcConfig {
  bool enabled = true;
  std::uint32_t stop = 50;          // packets per ingress port
  std::uint32_t go = 45;
  std::uint32_t headroom = 14;
  std::uint32_t port_budget = 64;   // 256 KB / 4 KB
  std::vector<std::uint32_t> per_vl_stop;  // used only with more than one VL
};

struct VlThresholds {
  std::uint32_t stop = 0;
  std::uint32_t go = 0;
};

// Resolves the per-VL stop/go pairs and validates the PFC invariants.
// Throws ConfigError when go >= stop, the per-VL stops overrun the port
// stop, or stop + headroom exceeds the port budget.
std::vector<VlThresholds> resolve_thresholds(const PfcConfig& cfg, std::uint32_t vl_count);

enum class PfcFrame : std::uint8_t { kPause, kResume };

// Ingress-side XOFF/XON generator for one port.
class PfcIngress {
 public:
  PfcIngress() = default;
  explicit PfcIngress(std::vector<VlThresholds> thresholds);

  // Emits a pause when occupancy reaches stop while unpaused, and a resume
  // when it falls to go while paused. Nothing in between (hysteresis).
  std::optional<PfcFrame> on_occupancy_change(std::uint32_t vl, std::uint32_t occupancy);

  bool paused(std::uint32_t vl) const { return paused_.at(vl); }
  const VlThresholds& thresholds(std::uint32_t vl) const { return thresholds_.at(vl); }

 private:
  std::vector<VlThresholds> thresholds_;
  std::vector<bool> paused_;
};

// Upstream view: whether a VL on an outgoing link may start a transmission.
class LinkPermission {
 public:
  explicit LinkPermission(std::uint32_t vl_count = 1) : paused_(vl_count, false) {}

  void apply_pause(PfcFrame frame, std::uint32_t vl) { paused_.at(vl) = frame == PfcFrame::kPause; }
  bool may_send(std::uint32_t vl) const { return !paused_.at(vl); }

 private:
  std::vector<bool> paused_;
};

}  // namespace ici
