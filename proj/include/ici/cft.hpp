#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ici/packet.hpp"
#include "ici/units.hpp"

namespace ici {

enum class CftKeyMode : std::uint8_t {
  kDestination,  // destination node + port exact, source wildcarded
  kExactTuple,
};

inline constexpr std::uint32_t kWildcardNode = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint16_t kWildcardPort = std::numeric_limits<std::uint16_t>::max();

// The key a packet of `tuple` is matched under.
FlowTuple cft_key(const FlowTuple& tuple, CftKeyMode mode);

struct RootLocator {
  std::uint32_t switch_id = 0;
  std::uint32_t port = 0;
  bool operator==(const RootLocator&) const = default;
};

struct CftEntry {
  FlowTuple key;
  RootLocator root;
  std::int64_t live_packet_counter = 0;
  SimTime residency_deadline = 0;
  SimTime created_at = 0;
};

enum class AllocationResult : std::uint8_t { kAllocated, kAlreadyPresent, kTableFull };

inline constexpr std::size_t kUnboundedCapacity = std::numeric_limits<std::size_t>::max();

// Congestion flow table for one switch port side. Entries are kept in
// insertion order; tables are small (default 8).
class CftTable {
 public:
  CftTable(std::size_t capacity = 8, CftKeyMode mode = CftKeyMode::kDestination,
           SimTime residency = 100 * kMicrosecond)
      : capacity_(capacity), mode_(mode), residency_(residency) {}

  AllocationResult allocate_entry(const FlowTuple& tuple, const RootLocator& root, SimTime now);

  // Entry whose key covers `tuple`, or null.
  CftEntry* match_packet(const FlowTuple& tuple);
  const CftEntry* match_packet(const FlowTuple& tuple) const;

  // Called by the owning queue when a matching packet enters/leaves the CFQ.
  void on_cfq_enqueue(CftEntry& entry) { ++entry.live_packet_counter; }
  void on_cfq_dequeue(const FlowTuple& tuple);

  // Removes exactly the entries with counter 0 whose residency has expired.
  std::vector<CftEntry> deallocate_tick(SimTime now);

  FlowTuple key_of(const FlowTuple& tuple) const { return cft_key(tuple, mode_); }
  CftKeyMode key_mode() const { return mode_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<CftEntry>& entries() const { return entries_; }

  std::uint64_t allocations() const { return allocations_; }
  std::uint64_t table_full_count() const { return table_full_; }
  std::size_t peak_size() const { return peak_; }

 private:
  std::size_t capacity_;
  CftKeyMode mode_;
  SimTime residency_;
  std::vector<CftEntry> entries_;
  std::uint64_t allocations_ = 0;
  std::uint64_t table_full_ = 0;
  std::size_t peak_ = 0;
};

// Egress-side congestion root detector with an active/cleared latch.
class RootDetector {
 public:
  // True when occupancy has reached the threshold and no root is active;
  // the detector then latches until clear().
  bool detect_root(std::uint32_t egress_occupancy, std::uint32_t threshold);
  void clear() { active_ = false; }
  bool active() const { return active_; }

 private:
  bool active_ = false;
};

}  // namespace ici
