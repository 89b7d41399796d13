#pragma once

#include <cstdint>
#include <functional>
#include <tuple>
#include <vector>

#include "ici/units.hpp"

namespace ici {

inline constexpr std::uint32_t kMtuBytes = 4096;
inline constexpr std::uint32_t kControlPacketBytes = 64;

// Flow identity used for CFT matching and victim/congesting classification.
struct FlowTuple {
  std::uint32_t src_node = 0;
  std::uint32_t dst_node = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;

  bool operator==(const FlowTuple&) const = default;
  bool operator<(const FlowTuple& o) const {
    return std::tie(src_node, dst_node, src_port, dst_port) <
           std::tie(o.src_node, o.dst_node, o.src_port, o.dst_port);
  }
};

struct FlowTupleHash {
  std::size_t operator()(const FlowTuple& t) const noexcept {
    std::uint64_t h = (std::uint64_t{t.src_node} << 32) ^ t.dst_node;
    h ^= (std::uint64_t{t.src_port} << 16 | t.dst_port) * 0x9e3779b97f4a7c15ull;
    h ^= h >> 29;
    return static_cast<std::size_t>(h * 0xbf58476d1ce4e5b9ull);
  }
};

enum class Ecn : std::uint8_t { kNotCapable, kCapable, kCongestionExperienced };

enum class PacketKind : std::uint8_t { kData, kBecn };

enum class TrafficClass : std::uint8_t { kUniform, kIncast, kMessage, kTrace };

struct Packet {
  PacketKind kind = PacketKind::kData;
  TrafficClass traffic = TrafficClass::kUniform;
  FlowTuple tuple;
  std::uint32_t route_dst = 0;  // terminal this packet is routed to
  std::uint8_t vl = 0;
  std::uint32_t size = kMtuBytes;
  Ecn ecn = Ecn::kCapable;
  std::uint16_t hops = 0;
  std::uint64_t msg_id = 0;  // 0 = not part of a tracked message
  SimTime inject_time = 0;
  SimTime deliver_time = 0;

  bool is_control() const { return kind != PacketKind::kData; }

  // ECN only ever moves capable -> congestion-experienced.
  void mark_ce() {
    if (ecn == Ecn::kCapable) ecn = Ecn::kCongestionExperienced;
  }
};

using PacketId = std::uint32_t;

// Slot storage for packets in flight; queues and events carry PacketIds.
class PacketPool {
 public:
  PacketId acquire(const Packet& p) {
    ++live_;
    if (!free_.empty()) {
      const PacketId id = free_.back();
      free_.pop_back();
      slots_[id] = p;
      return id;
    }
    slots_.push_back(p);
    return static_cast<PacketId>(slots_.size() - 1);
  }
  void release(PacketId id) {
    --live_;
    free_.push_back(id);
  }
  Packet& operator[](PacketId id) { return slots_[id]; }
  const Packet& operator[](PacketId id) const { return slots_[id]; }
  std::size_t live() const { return live_; }

 private:
  std::vector<Packet> slots_;
  std::vector<PacketId> free_;
  std::size_t live_ = 0;
};

}  // namespace ici
