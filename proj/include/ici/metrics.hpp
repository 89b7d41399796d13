#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ici/packet.hpp"
#include "ici/switch_model.hpp"
#include "ici/units.hpp"

namespace ici {

// Nearest-rank percentile: the ceil(q*n)-th smallest value (rank 1 for q=0).
// Empty input yields nullopt.
template <typename T>
std::optional<T> percentile(std::vector<T> values, double q) {
  if (values.empty() || q < 0 || q > 1) return std::nullopt;
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

struct FctRecord {
  std::uint64_t msg_id = 0;
  std::uint64_t size = 0;
  SimTime inject = 0;
  SimTime complete = 0;
  SimTime fct() const { return complete - inject; }
};

struct PfcEventRecord {
  SimTime time = 0;
  bool from_switch = true;  // false: sent by a host NIC (never happens today)
  std::uint32_t node = 0;
  std::uint32_t port = 0;
  std::uint32_t vl = 0;
  bool pause = true;
};

struct BecnEventRecord {
  SimTime time = 0;
  FlowTuple flow;
  std::uint16_t hops = 0;
};

struct RunReport {
  std::string scenario;
  std::string cc_mode;
  std::uint64_t seed = 0;
  SimTime bin_width = 10 * kMicrosecond;
  SimTime end_time = 0;
  bool completed = true;
  std::string failure;

  std::uint64_t injected_packets = 0;
  std::uint64_t delivered_packets = 0;
  std::uint64_t delivered_bytes = 0;
  std::vector<std::uint64_t> delivered_bytes_ts;
  std::uint64_t becn_total = 0;
  std::vector<std::uint64_t> becn_ts;
  std::uint64_t pfc_pause_total = 0;
  std::uint64_t pfc_resume_total = 0;

  std::vector<FctRecord> fct;
  std::uint64_t incomplete_messages = 0;
  std::optional<SimTime> fct_p50, fct_p95, fct_p99;

  double mean_latency_ns = 0;
  double victim_latency_ns = 0;
  std::uint64_t victim_packets = 0;
  double throughput_gbps = 0;

  std::uint64_t marks_plain = 0;
  std::uint64_t marks_suppressed = 0;
  std::uint64_t marks_targeted = 0;
  std::uint64_t marks_in_gated_modes = 0;
  std::uint64_t victim_mark_violations = 0;
  std::uint64_t drop_count = 0;
  std::uint64_t table_full_events = 0;
  std::uint64_t escalations = 0;
  std::uint64_t root_events = 0;
  std::uint64_t cft_allocations = 0;
  std::uint64_t audit_checks = 0;
  std::uint64_t audit_violations = 0;
  std::uint32_t max_ingress_packets = 0;
  std::uint64_t max_egress_bytes = 0;
  std::uint64_t events_dispatched = 0;
  std::uint64_t trace_digest = 0;

  // Per-bin peaks of sampled network-wide buffer and CFT occupancy.
  std::vector<std::uint32_t> buffered_peak_ts;
  std::vector<std::uint32_t> cft_entries_peak_ts;

  std::vector<PfcEventRecord> pfc_events;
  std::vector<BecnEventRecord> becn_events;
  std::vector<CftEvent> cft_events;
  std::vector<ModeEvent> mode_events;

  std::uint64_t peak_becn_bin() const {
    return becn_ts.empty() ? 0 : *std::max_element(becn_ts.begin(), becn_ts.end());
  }
  std::uint64_t marks_total() const { return marks_plain + marks_targeted; }
};

// Event-loop-side accumulator. Feeds a RunReport; percentiles and averages
// are computed in finalize().
class MetricsCollector {
 public:
  explicit MetricsCollector(SimTime bin_width);

  void on_injected(std::uint64_t packets) { report_.injected_packets += packets; }
  void on_message_start(std::uint64_t msg_id, std::uint64_t size, std::uint64_t packets, SimTime inject);
  void on_delivered(const Packet& pkt, SimTime now);
  void on_becn(const FlowTuple& flow, std::uint16_t hops, SimTime now);
  void on_pfc(std::uint32_t sw, std::uint32_t port, std::uint32_t vl, bool pause, SimTime now);
  void on_sample(std::uint32_t buffered_packets, std::uint32_t cft_entries, SimTime now);

  RunReport& report() { return report_; }
  // Computes derived fields; `end` is the final simulated time.
  void finalize(SimTime end, BitsPerSecond link_rate);

 private:
  std::size_t bin_of(SimTime t) const { return static_cast<std::size_t>(t / report_.bin_width); }
  static void bump(std::vector<std::uint64_t>& ts, std::size_t bin, std::uint64_t by);

  struct Pending {
    std::uint64_t size = 0;
    std::uint64_t remaining = 0;
    SimTime inject = 0;
  };

  RunReport report_;
  std::unordered_map<std::uint64_t, Pending> messages_;
  long double latency_sum_ = 0;
  long double victim_latency_sum_ = 0;
};

// Writes summary.csv, becn_ts.csv, throughput_ts.csv, fct.csv,
// occupancy_ts.csv, pfc_events.csv, becn_events.csv, cft_events.csv, mode_events.csv and,
// when requested, events.log. Throws std::runtime_error on I/O failure.
void export_report(const RunReport& report, const std::string& out_dir, bool with_event_log = false);

inline constexpr const char* kCsvSchema = "# icisim-csv v1";
std::string summary_header();
std::string summary_row(const RunReport& report);

}  // namespace ici
