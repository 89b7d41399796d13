#include "ici/cft.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace ici {

FlowTuple cft_key(const FlowTuple& tuple, CftKeyMode mode) {
  if (mode == CftKeyMode::kExactTuple) return tuple;
  return FlowTuple{kWildcardNode, tuple.dst_node, kWildcardPort, tuple.dst_port};
}

AllocationResult CftTable::allocate_entry(const FlowTuple& tuple, const RootLocator& root,
                                          SimTime now) {
  const FlowTuple key = key_of(tuple);
  for (const auto& e : entries_)
    if (e.key == key) return AllocationResult::kAlreadyPresent;
  if (entries_.size() >= capacity_) {
    ++table_full_;
    return AllocationResult::kTableFull;
  }
  entries_.push_back(CftEntry{key, root, 0, now + residency_, now});
  ++allocations_;
  peak_ = std::max(peak_, entries_.size());
  return AllocationResult::kAllocated;
}

CftEntry* CftTable::match_packet(const FlowTuple& tuple) {
  const FlowTuple key = key_of(tuple);
  for (auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

const CftEntry* CftTable::match_packet(const FlowTuple& tuple) const {
  return const_cast<CftTable*>(this)->match_packet(tuple);
}

void CftTable::on_cfq_dequeue(const FlowTuple& tuple) {
  CftEntry* e = match_packet(tuple);
  if (!e || e->live_packet_counter <= 0) {
    std::fprintf(stderr, "cft: CFQ dequeue without a live matching entry\n");
    std::abort();
  }
  --e->live_packet_counter;
}

std::vector<CftEntry> CftTable::deallocate_tick(SimTime now) {
  std::vector<CftEntry> removed;
  auto keep = std::stable_partition(entries_.begin(), entries_.end(), [&](const CftEntry& e) {
    return !(e.live_packet_counter == 0 && now >= e.residency_deadline);
  });
  removed.assign(keep, entries_.end());
  entries_.erase(keep, entries_.end());
  return removed;
}

bool RootDetector::detect_root(std::uint32_t egress_occupancy, std::uint32_t threshold) {
  if (active_ || egress_occupancy < threshold) return false;
  active_ = true;
  return true;
}

}  // namespace ici
