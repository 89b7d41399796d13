#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "ici/units.hpp"

namespace ici {

enum class EventKind : std::uint8_t {
  kInjection,
  kPacketArrival,
  kTransmitComplete,
  kPauseFrame,
  kFabricTick,
  kNicWake,
  kDcqcnTimer,
  kCftTimer,
  kSample,
};

struct Event {
  SimTime fire_time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kInjection;
  std::uint32_t target = 0;
  std::uint32_t port = 0;
  std::uint64_t aux = 0;
};

using EventHandle = std::uint64_t;

// Single-threaded discrete-event loop. Events fire in (fire_time, seq) order,
// seq being the insertion counter, so equal-time events keep schedule order.
class Engine {
 public:
  using Dispatcher = std::function<void(const Event&)>;

  Engine() = default;
  explicit Engine(Dispatcher dispatcher) : dispatcher_(std::move(dispatcher)) {}

  void set_dispatcher(Dispatcher dispatcher) { dispatcher_ = std::move(dispatcher); }

  // Aborts if fire_time < now(): scheduling into the past is a model bug.
  EventHandle schedule(SimTime fire_time, EventKind kind, std::uint32_t target,
                       std::uint32_t port = 0, std::uint64_t aux = 0);
  void cancel(EventHandle handle);

  // Dispatches every event with fire_time <= t_end, then advances the clock
  // to t_end. Returns the number of dispatched events.
  std::uint64_t run_until(SimTime t_end);

  // Dispatches until the queue drains, stop() is called, or t_limit passes.
  // The clock is left at the last dispatched event.
  std::uint64_t run(SimTime t_limit);

  void stop() { stopped_ = true; }
  bool stopped() const { return stopped_; }

  SimTime now() const { return now_; }
  std::size_t pending() const { return queue_.size() - cancelled_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }

  // FNV-1a digest over every dispatched (fire_time, seq, kind, target, port).
  std::uint64_t trace_digest() const { return digest_; }

  // When set, each dispatched event is appended here.
  void record_into(std::vector<Event>* log) { log_ = log; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.seq > b.seq;
    }
  };

  bool dispatch_next(SimTime t_end);

  Dispatcher dispatcher_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<EventHandle> cancelled_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t digest_ = 1469598103934665603ull;
  bool stopped_ = false;
  std::vector<Event>* log_ = nullptr;
};

}  // namespace ici
