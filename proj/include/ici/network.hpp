#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ici/config.hpp"
#include "ici/metrics.hpp"
#include "ici/nic.hpp"
#include "ici/sim_core.hpp"
#include "ici/switch_model.hpp"
#include "ici/topology.hpp"
#include "ici/traffic.hpp"

namespace ici {

// Derives independent per-component seeds from the scenario seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// One isolated simulation instance: topology, switches, NICs, generators
// and the event loop. Not copyable; instances share nothing.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Extra injection source, e.g. a hand-built stream in tests.
  void add_stream(std::unique_ptr<InjectionStream> stream);

  // Runs until every generator is exhausted and every packet is delivered,
  // or max_time passes. Never throws on model failures; they are reported.
  RunReport run();

  const ScenarioConfig& config() const { return cfg_; }
  const MinTopology& topology() const { return topo_; }
  Engine& engine() { return engine_; }
  PacketPool& pool() { return pool_; }
  Switch& switch_at(std::uint32_t id) { return *switches_.at(id); }
  HostNic& nic(std::uint32_t host) { return *nics_.at(host); }
  const NodeRoles& roles() const { return roles_; }

  // Called for every delivered data packet before it is released.
  std::function<void(const Packet&, SimTime)> on_deliver;

 private:
  static constexpr std::uint32_t kHostFlag = 0x80000000u;

  void dispatch(const Event& ev);
  void on_injection(std::uint32_t stream);
  void pull_next(std::uint32_t stream);
  void on_switch_arrival(std::uint32_t sw, std::uint32_t port, PacketId pid);
  void on_host_arrival(std::uint32_t host, PacketId pid);
  void on_fabric_tick(std::uint32_t sw);
  void on_pause(std::uint32_t target, std::uint32_t port, std::uint64_t aux);
  void on_cft_timer();
  void on_sample();

  void try_nic_send(std::uint32_t host);
  void try_port_send(std::uint32_t sw, std::uint32_t port);
  void schedule_fabric(std::uint32_t sw);
  void send_pause(std::uint32_t sw, std::uint32_t in_port, std::uint32_t vl, PfcFrame frame);
  bool finished() const;
  void check_finished();

  ScenarioConfig cfg_;
  MinTopology topo_;
  SwitchConfig sw_cfg_;
  NicConfig nic_cfg_;
  Engine engine_;
  PacketPool pool_;
  SwitchLogs logs_;
  MetricsCollector metrics_;
  NodeRoles roles_;
  std::vector<std::unique_ptr<Switch>> switches_;
  std::vector<std::unique_ptr<HostNic>> nics_;
  std::vector<std::unique_ptr<InjectionStream>> streams_;
  std::vector<std::optional<Injection>> pending_;
  std::size_t live_streams_ = 0;
  std::vector<SimTime> last_tick_;
  std::vector<bool> tick_pending_;
  SimTime quantum_ = 0;
  bool started_ = false;
  bool dcqcn_ = false;
};

// Convenience: build, run, and return the report of one scenario.
RunReport run_scenario(const ScenarioConfig& cfg);

}  // namespace ici
