#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ici/units.hpp"

namespace ici {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeType : std::uint8_t { kTerminal, kSwitch };

struct NodeRef {
  NodeType type = NodeType::kTerminal;
  std::uint32_t id = 0;
  bool operator==(const NodeRef&) const = default;
};

struct LinkEnd {
  NodeRef peer;
  std::uint32_t peer_port = 0;
};

struct SwitchNode {
  std::uint32_t stage = 0;   // 0 = edge
  std::uint32_t label = 0;   // base-k digits, position 0 least significant
  std::uint32_t down_ports = 0;
  std::uint32_t up_ports = 0;
  std::vector<LinkEnd> ports;  // [0, down) downward, [down, down+up) upward
};

struct MinParams {
  std::uint32_t radix = 8;
  std::uint32_t terminals = 64;
  std::uint32_t oversubscription = 1;  // edge down-links : up-links
  BitsPerSecond link_rate = 100 * kGbps;
  SimTime link_delay = 25 * kNanosecond;
};

// k-ary n-tree multistage network with destination-based D-mod-K routing.
// Immutable once built.
class MinTopology {
 public:
  std::uint32_t radix() const { return radix_; }
  std::uint32_t arity() const { return arity_; }
  std::uint32_t stages() const { return stages_; }
  std::uint32_t terminals() const { return terminals_; }
  std::uint32_t oversubscription() const { return oversubscription_; }
  BitsPerSecond link_rate() const { return link_rate_; }
  SimTime link_delay() const { return link_delay_; }

  std::size_t switch_count() const { return switches_.size(); }
  const SwitchNode& switch_at(std::uint32_t id) const { return switches_.at(id); }
  const std::vector<SwitchNode>& switches() const { return switches_; }

  // Edge switch and port the terminal's NIC is wired to.
  const LinkEnd& terminal_link(std::uint32_t terminal) const { return terminal_links_.at(terminal); }

  // Output port at `current_switch` toward terminal `dst`. Pure function of
  // its arguments; throws std::logic_error on an unknown switch or dst.
  std::uint32_t route(std::uint32_t current_switch, std::uint32_t dst) const;

  // Switch-to-switch links crossing the boundary above `stage`.
  std::size_t links_above_stage(std::uint32_t stage) const;

  // Plain-text node/link listing used by fixtures and `icisim topology`.
  std::string summary() const;

 private:
  friend MinTopology build_min(const MinParams& params);

  std::uint32_t digit(std::uint32_t value, std::uint32_t position) const;

  std::uint32_t radix_ = 0;
  std::uint32_t arity_ = 0;
  std::uint32_t stages_ = 0;
  std::uint32_t terminals_ = 0;
  std::uint32_t oversubscription_ = 1;
  BitsPerSecond link_rate_ = 0;
  SimTime link_delay_ = 0;
  std::vector<SwitchNode> switches_;
  std::vector<LinkEnd> terminal_links_;
};

// Builds a single switch when terminals == radix, otherwise a k-ary n-tree
// with k = radix/2 and terminals = k^n. Throws ConfigError naming the
// nearest buildable size when the combination is impossible.
MinTopology build_min(const MinParams& params);

}  // namespace ici
