#include "ici/sim_core.hpp"

#include <cstdio>
#include <cstdlib>

namespace ici {

namespace {

void mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
}

}  // namespace

EventHandle Engine::schedule(SimTime fire_time, EventKind kind, std::uint32_t target,
                             std::uint32_t port, std::uint64_t aux) {
  if (fire_time < now_) {
    std::fprintf(stderr,
                 "sim-core: event kind %d for target %u scheduled at %lld ps, before now=%lld ps\n",
                 static_cast<int>(kind), target, static_cast<long long>(fire_time),
                 static_cast<long long>(now_));
    std::abort();
  }
  const EventHandle seq = next_seq_++;
  queue_.push(Event{fire_time, seq, kind, target, port, aux});
  return seq;
}

void Engine::cancel(EventHandle handle) {
  if (handle < next_seq_) cancelled_.insert(handle);
}

bool Engine::dispatch_next(SimTime t_end) {
  while (!queue_.empty()) {
    const Event& top = queue_.top();
    if (top.fire_time > t_end) return false;
    Event ev = top;
    queue_.pop();
    if (auto it = cancelled_.find(ev.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    now_ = ev.fire_time;
    ++dispatched_;
    mix(digest_, static_cast<std::uint64_t>(ev.fire_time));
    mix(digest_, ev.seq);
    mix(digest_, static_cast<std::uint64_t>(ev.kind));
    mix(digest_, (static_cast<std::uint64_t>(ev.target) << 32) | ev.port);
    if (log_) log_->push_back(ev);
    if (dispatcher_) dispatcher_(ev);
    return true;
  }
  return false;
}

std::uint64_t Engine::run_until(SimTime t_end) {
  const std::uint64_t before = dispatched_;
  stopped_ = false;
  while (!stopped_ && dispatch_next(t_end)) {
  }
  if (!stopped_ && now_ < t_end) now_ = t_end;
  return dispatched_ - before;
}

std::uint64_t Engine::run(SimTime t_limit) {
  const std::uint64_t before = dispatched_;
  stopped_ = false;
  while (!stopped_ && dispatch_next(t_limit)) {
  }
  return dispatched_ - before;
}

}  // namespace ici
