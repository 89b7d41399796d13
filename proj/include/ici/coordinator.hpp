#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ici/cft.hpp"
#include "ici/dcqcn.hpp"
#include "ici/packet.hpp"
#include "ici/units.hpp"

namespace ici {

enum class CoordinatorMode : std::uint8_t { kQuiescent, kIsolating, kDelegating };
enum class EscalationCause : std::uint8_t { kNone, kTableFull, kPersistence };

const char* to_string(CoordinatorMode m);
const char* to_string(EscalationCause c);

struct CoordinatorConfig {
  SimTime persistence_window = 200 * kMicrosecond;
  bool mark_cft_entries_when_delegating = true;
  std::size_t overflow_capacity = 16;
  // Plain marking while no root is active. Off: marking engages only after
  // an escalation, so isolation gets the first response to every root.
  bool quiescent_marking = false;
  // Also treat a CFQ pinned at its packet limit as "still saturated" when
  // the persistence window closes.
  bool escalate_on_saturated_cfq = false;
};

struct ModeTransition {
  SimTime time = 0;
  CoordinatorMode from = CoordinatorMode::kQuiescent;
  CoordinatorMode to = CoordinatorMode::kQuiescent;
  EscalationCause cause = EscalationCause::kNone;
};

enum class MarkDecision : std::uint8_t { kNoMark, kMark };

// Inputs the gate needs about the packet being dequeued.
struct GateInput {
  bool matches_cft_entry = false;
  bool matches_overflow = false;
  double total_occupancy = 0;       // packets in the egress (port, VL)
  double congesting_occupancy = 0;  // CFQ packets + queued overflow-tuple packets
  double uniform_draw = 0;          // U[0,1) used for the marking decision
};

// Per-egress coordinator: CI state decides whether, and on which packets,
// DCQCN's ECN marking may act.
class EgressCoordinator {
 public:
  EgressCoordinator() = default;
  explicit EgressCoordinator(CoordinatorConfig cfg) : cfg_(cfg) {}

  std::optional<ModeTransition> on_root_event(SimTime now);

  // Precondition: mode is isolating or delegating (aborts when quiescent).
  // A table-full escalation records `overflow_key` as markable.
  std::optional<ModeTransition> on_escalation(EscalationCause cause, SimTime now,
                                              std::optional<FlowTuple> overflow_key = {});

  // True when an isolating episode has outlived its persistence window.
  bool persistence_due(SimTime now) const {
    return mode_ == CoordinatorMode::kIsolating && now >= persistence_deadline_;
  }

  // Returns to quiescent only when no entry remains and occupancy is below
  // the detection threshold.
  std::optional<ModeTransition> on_root_cleared(bool entries_remaining, std::uint32_t occupancy,
                                                std::uint32_t threshold, SimTime now);

  MarkDecision marking_gate(const EcnMarkerConfig& marker, const GateInput& in);

  bool overflow_matches(const FlowTuple& key) const;

  CoordinatorMode mode() const { return mode_; }
  EscalationCause escalation_cause() const { return cause_; }
  SimTime persistence_deadline() const { return persistence_deadline_; }
  const std::vector<FlowTuple>& overflow_keys() const { return overflow_; }

  std::uint64_t plain_marks() const { return plain_marks_; }
  std::uint64_t suppressed_marks() const { return suppressed_marks_; }
  std::uint64_t targeted_marks() const { return targeted_marks_; }

 private:
  ModeTransition move_to(CoordinatorMode to, EscalationCause cause, SimTime now);

  CoordinatorConfig cfg_;
  CoordinatorMode mode_ = CoordinatorMode::kQuiescent;
  EscalationCause cause_ = EscalationCause::kNone;
  SimTime persistence_deadline_ = 0;
  std::vector<FlowTuple> overflow_;
  std::uint64_t plain_marks_ = 0;
  std::uint64_t suppressed_marks_ = 0;
  std::uint64_t targeted_marks_ = 0;
};

}  // namespace ici
