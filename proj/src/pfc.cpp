#include "ici/pfc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ici/topology.hpp"

namespace ici {

std::vector<VlThresholds> resolve_thresholds(const PfcConfig& cfg, std::uint32_t vl_count) {
  if (vl_count == 0) throw ConfigError("pfc: vl_count must be >= 1");
  if (cfg.go >= cfg.stop) throw ConfigError("pfc: go threshold must be below stop threshold");
  if (cfg.stop + cfg.headroom > cfg.port_budget) {
    std::ostringstream os;
    os << "pfc: stop (" << cfg.stop << ") + headroom (" << cfg.headroom
       << ") exceeds the port budget of " << cfg.port_budget << " packets";
    throw ConfigError(os.str());
  }
  if (vl_count == 1 || cfg.per_vl_stop.empty()) {
    if (vl_count > 1 && !cfg.per_vl_stop.empty())
      throw ConfigError("pfc: per_vl_stop given for a single VL");
    return std::vector<VlThresholds>(vl_count, VlThresholds{cfg.stop, cfg.go});
  }
  if (cfg.per_vl_stop.size() != vl_count) {
    std::ostringstream os;
    os << "pfc: per_vl_stop has " << cfg.per_vl_stop.size() << " entries for " << vl_count
       << " VLs";
    throw ConfigError(os.str());
  }
  const auto sum = std::accumulate(cfg.per_vl_stop.begin(), cfg.per_vl_stop.end(), 0u);
  if (sum > cfg.stop) {
    std::ostringstream os;
    os << "pfc: per_vl_stop sums to " << sum << ", above the port-level stop of " << cfg.stop;
    throw ConfigError(os.str());
  }
  // The port-level stop/go gap shrinks in proportion to each VL's stop.
  const double gap = static_cast<double>(cfg.stop - cfg.go);
  std::vector<VlThresholds> out;
  for (auto stop : cfg.per_vl_stop) {
    if (stop < 2) throw ConfigError("pfc: per-VL stop must be >= 2");
    const auto scaled = static_cast<std::uint32_t>(std::lround(gap * stop / cfg.stop));
    out.push_back(VlThresholds{stop, stop - std::clamp(scaled, 1u, stop - 1)});
  }
  return out;
}

PfcIngress::PfcIngress(std::vector<VlThresholds> thresholds)
    : thresholds_(std::move(thresholds)), paused_(thresholds_.size(), false) {}

std::optional<PfcFrame> PfcIngress::on_occupancy_change(std::uint32_t vl, std::uint32_t occupancy) {
  const auto& th = thresholds_.at(vl);
  if (!paused_[vl] && occupancy >= th.stop) {
    paused_[vl] = true;
    return PfcFrame::kPause;
  }
  if (paused_[vl] && occupancy <= th.go) {
    paused_[vl] = false;
    return PfcFrame::kResume;
  }
  return std::nullopt;
}

}  // namespace ici
