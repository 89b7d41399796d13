#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ici/dcqcn.hpp"
#include "ici/nic.hpp"
#include "ici/switch_model.hpp"
#include "ici/topology.hpp"
#include "ici/traffic.hpp"

namespace ici {

enum class CcMode : std::uint8_t { kNone, kDcqcn, kCi, kCiDcqcnNaive, kIci };

const char* to_string(CcMode m);
CcMode parse_cc_mode(const std::string& s);  // throws ConfigError
const std::vector<CcMode>& all_cc_modes();
bool uses_ci(CcMode m);
bool uses_dcqcn(CcMode m);

// Full experiment description. Defaults are the reference 64-node setup.
struct ScenarioConfig {
  std::string name = "custom";
  CcMode cc_mode = CcMode::kIci;
  std::uint64_t seed = 1;

  MinParams topology;
  std::uint32_t vl_count = 1;
  double speedup = 2.0;
  std::uint64_t port_partition = 512 * 1024;
  std::uint64_t egress_cap = 256 * 1024;

  PfcConfig pfc;
  EcnMarkerConfig ecn;
  DcqcnParams dcqcn;
  CiConfig ci;
  CoordinatorConfig ici;

  double incast_fraction = 0.25;
  std::vector<WorkloadSpec> workloads;

  SimTime bin_width = 10 * kMicrosecond;
  SimTime sample_period = kMicrosecond;
  bool event_log = false;
  SimTime max_time = 100 * kMillisecond;
  bool audit = false;

  // Switch and NIC configuration implied by cc_mode and the overrides.
  SwitchConfig switch_config() const;
  NicConfig nic_config() const;
  std::uint32_t root_count() const;

  // Throws ConfigError naming the offending key and constraint.
  void validate() const;
};

// Workloads of a named scenario preset; throws ConfigError for unknown names.
std::vector<WorkloadSpec> preset_workloads(const std::string& preset);
const std::vector<std::string>& preset_names();

// JSON parsing with defaults applied and unknown keys rejected. An empty
// document yields the defaults. The result is validated.
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
ScenarioConfig parse_config_file(const std::string& path);

// Fully resolved configuration; parsing it back yields an identical config.
std::string effective_config_json(const ScenarioConfig& cfg);

}  // namespace ici
