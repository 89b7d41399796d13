#include "ici/coordinator.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace ici {

const char* to_string(CoordinatorMode m) {
  switch (m) {
    case CoordinatorMode::kQuiescent: return "quiescent";
    case CoordinatorMode::kIsolating: return "isolating";
    case CoordinatorMode::kDelegating: return "delegating";
  }
  return "?";
}

const char* to_string(EscalationCause c) {
  switch (c) {
    case EscalationCause::kNone: return "none";
    case EscalationCause::kTableFull: return "table-full";
    case EscalationCause::kPersistence: return "persistence";
  }
  return "?";
}

ModeTransition EgressCoordinator::move_to(CoordinatorMode to, EscalationCause cause, SimTime now) {
  ModeTransition t{now, mode_, to, cause};
  mode_ = to;
  cause_ = cause;
  return t;
}

std::optional<ModeTransition> EgressCoordinator::on_root_event(SimTime now) {
  if (mode_ != CoordinatorMode::kQuiescent) return std::nullopt;
  persistence_deadline_ = now + cfg_.persistence_window;
  return move_to(CoordinatorMode::kIsolating, EscalationCause::kNone, now);
}

std::optional<ModeTransition> EgressCoordinator::on_escalation(EscalationCause cause, SimTime now,
                                                               std::optional<FlowTuple> key) {
  if (mode_ == CoordinatorMode::kQuiescent || cause == EscalationCause::kNone) {
    std::fprintf(stderr, "ici: escalation (%s) requested while %s\n", to_string(cause),
                 to_string(mode_));
    std::abort();
  }
  if (cause == EscalationCause::kTableFull && key && !overflow_matches(*key) &&
      overflow_.size() < cfg_.overflow_capacity) {
    overflow_.push_back(*key);
  }
  if (mode_ == CoordinatorMode::kDelegating) return std::nullopt;
  return move_to(CoordinatorMode::kDelegating, cause, now);
}

std::optional<ModeTransition> EgressCoordinator::on_root_cleared(bool entries_remaining,
                                                                 std::uint32_t occupancy,
                                                                 std::uint32_t threshold,
                                                                 SimTime now) {
  if (mode_ == CoordinatorMode::kQuiescent || entries_remaining || occupancy >= threshold)
    return std::nullopt;
  overflow_.clear();
  return move_to(CoordinatorMode::kQuiescent, EscalationCause::kNone, now);
}

bool EgressCoordinator::overflow_matches(const FlowTuple& key) const {
  return std::find(overflow_.begin(), overflow_.end(), key) != overflow_.end();
}

MarkDecision EgressCoordinator::marking_gate(const EcnMarkerConfig& marker, const GateInput& in) {
  const bool plain_would_mark = in.uniform_draw < mark_probability(marker, in.total_occupancy);
  switch (mode_) {
    case CoordinatorMode::kQuiescent:
      if (!cfg_.quiescent_marking) {
        if (plain_would_mark) ++suppressed_marks_;
        return MarkDecision::kNoMark;
      }
      if (plain_would_mark) {
        ++plain_marks_;
        return MarkDecision::kMark;
      }
      return MarkDecision::kNoMark;
    case CoordinatorMode::kIsolating:
      if (plain_would_mark) ++suppressed_marks_;
      return MarkDecision::kNoMark;
    case CoordinatorMode::kDelegating: {
      const bool congesting =
          in.matches_overflow || (cfg_.mark_cft_entries_when_delegating && in.matches_cft_entry);
      if (!congesting) {
        if (plain_would_mark) ++suppressed_marks_;
        return MarkDecision::kNoMark;
      }
      if (in.uniform_draw < mark_probability(marker, in.congesting_occupancy)) {
        ++targeted_marks_;
        return MarkDecision::kMark;
      }
      return MarkDecision::kNoMark;
    }
  }
  return MarkDecision::kNoMark;
}

}  // namespace ici
