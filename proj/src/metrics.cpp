#include "ici/metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ici {

MetricsCollector::MetricsCollector(SimTime bin_width) {
  if (bin_width <= 0) throw std::invalid_argument("metrics: bin width must be positive");
  report_.bin_width = bin_width;
}

void MetricsCollector::bump(std::vector<std::uint64_t>& ts, std::size_t bin, std::uint64_t by) {
  if (ts.size() <= bin) ts.resize(bin + 1, 0);
  ts[bin] += by;
}

void MetricsCollector::on_message_start(std::uint64_t msg_id, std::uint64_t size,
                                        std::uint64_t packets, SimTime inject) {
  messages_[msg_id] = Pending{size, packets, inject};
}

void MetricsCollector::on_delivered(const Packet& pkt, SimTime now) {
  ++report_.delivered_packets;
  report_.delivered_bytes += pkt.size;
  bump(report_.delivered_bytes_ts, bin_of(now), pkt.size);
  const SimTime lat = now - pkt.inject_time;
  latency_sum_ += lat;
  if (pkt.traffic == TrafficClass::kUniform) {
    victim_latency_sum_ += lat;
    ++report_.victim_packets;
  }
  if (pkt.msg_id == 0) return;
  auto it = messages_.find(pkt.msg_id);
  if (it == messages_.end()) return;
  if (--it->second.remaining == 0) {
    report_.fct.push_back(FctRecord{pkt.msg_id, it->second.size, it->second.inject, now});
    messages_.erase(it);
  }
}

void MetricsCollector::on_becn(const FlowTuple& flow, std::uint16_t hops, SimTime now) {
  ++report_.becn_total;
  bump(report_.becn_ts, bin_of(now), 1);
  report_.becn_events.push_back(BecnEventRecord{now, flow, hops});
}

void MetricsCollector::on_pfc(std::uint32_t sw, std::uint32_t port, std::uint32_t vl, bool pause,
                              SimTime now) {
  (pause ? report_.pfc_pause_total : report_.pfc_resume_total)++;
  report_.pfc_events.push_back(PfcEventRecord{now, true, sw, port, vl, pause});
}

void MetricsCollector::on_sample(std::uint32_t buffered_packets, std::uint32_t cft_entries,
                                 SimTime now) {
  const auto bin = bin_of(now);
  for (auto* ts : {&report_.buffered_peak_ts, &report_.cft_entries_peak_ts})
    if (ts->size() <= bin) ts->resize(bin + 1, 0);
  report_.buffered_peak_ts[bin] = std::max(report_.buffered_peak_ts[bin], buffered_packets);
  report_.cft_entries_peak_ts[bin] = std::max(report_.cft_entries_peak_ts[bin], cft_entries);
}

void MetricsCollector::finalize(SimTime end, BitsPerSecond link_rate) {
  (void)link_rate;
  report_.end_time = end;
  const std::size_t bins = end > 0 ? bin_of(end - 1) + 1 : 0;
  if (report_.becn_ts.size() < bins) report_.becn_ts.resize(bins, 0);
  if (report_.delivered_bytes_ts.size() < bins) report_.delivered_bytes_ts.resize(bins, 0);
  if (report_.delivered_packets > 0)
    report_.mean_latency_ns = static_cast<double>(latency_sum_ / report_.delivered_packets) / kNanosecond;
  if (report_.victim_packets > 0)
    report_.victim_latency_ns = static_cast<double>(victim_latency_sum_ / report_.victim_packets) / kNanosecond;
  if (end > 0)
    report_.throughput_gbps = static_cast<double>(report_.delivered_bytes) * 8.0 / (static_cast<double>(end) / 1e12) / 1e9;
  std::sort(report_.fct.begin(), report_.fct.end(),
            [](const FctRecord& a, const FctRecord& b) { return a.msg_id < b.msg_id; });
  std::vector<SimTime> fcts;
  fcts.reserve(report_.fct.size());
  for (const auto& r : report_.fct) fcts.push_back(r.fct());
  report_.fct_p50 = percentile(fcts, 0.50);
  report_.fct_p95 = percentile(fcts, 0.95);
  report_.fct_p99 = percentile(fcts, 0.99);
  report_.incomplete_messages = messages_.size();
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_opt_ns(const std::optional<SimTime>& v) {
  if (!v) return "";
  return fmt_double(static_cast<double>(*v) / kNanosecond);
}

std::string fmt_flow(const FlowTuple& f) {
  std::ostringstream os;
  os << f.src_node << ',' << f.dst_node << ',' << f.src_port << ',' << f.dst_port;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << kCsvSchema << '\n';
  return f;
}

void close_checked(std::ofstream& f, const std::filesystem::path& p) {
  f.close();
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

const char* cft_kind(CftEventKind k) {
  switch (k) {
    case CftEventKind::kAllocate: return "allocate";
    case CftEventKind::kDeallocate: return "deallocate";
    case CftEventKind::kTableFull: return "table_full";
  }
  return "?";
}

}  // namespace

std::string summary_header() {
  return "scenario,cc_mode,seed,completed,end_time_ns,injected_packets,delivered_packets,"
         "delivered_bytes,throughput_gbps,becn_total,becn_peak_bin,pfc_pause_total,pfc_resume_total,"
         "marks_plain,marks_suppressed,marks_targeted,marks_in_gated_modes,victim_mark_violations,"
         "drop_count,table_full_events,escalations,root_events,cft_allocations,messages_completed,"
         "messages_incomplete,fct_p50_ns,fct_p95_ns,fct_p99_ns,mean_latency_ns,victim_latency_ns,"
         "max_ingress_packets,max_egress_bytes,audit_checks,audit_violations,failure";
}

std::string summary_row(const RunReport& r) {
  std::ostringstream os;
  os << r.scenario << ',' << r.cc_mode << ',' << r.seed << ',' << (r.completed ? 1 : 0) << ','
     << fmt_double(static_cast<double>(r.end_time) / kNanosecond) << ',' << r.injected_packets << ','
     << r.delivered_packets << ',' << r.delivered_bytes << ',' << fmt_double(r.throughput_gbps) << ','
     << r.becn_total << ',' << r.peak_becn_bin() << ',' << r.pfc_pause_total << ','
     << r.pfc_resume_total << ',' << r.marks_plain << ',' << r.marks_suppressed << ','
     << r.marks_targeted << ',' << r.marks_in_gated_modes << ',' << r.victim_mark_violations << ','
     << r.drop_count << ',' << r.table_full_events << ',' << r.escalations << ',' << r.root_events
     << ',' << r.cft_allocations << ',' << r.fct.size() << ',' << r.incomplete_messages << ','
     << fmt_opt_ns(r.fct_p50) << ',' << fmt_opt_ns(r.fct_p95) << ',' << fmt_opt_ns(r.fct_p99) << ','
     << fmt_double(r.mean_latency_ns) << ',' << fmt_double(r.victim_latency_ns) << ','
     << r.max_ingress_packets << ',' << r.max_egress_bytes << ',' << r.audit_checks << ','
     << r.audit_violations << ',';
  // failure text is free-form; keep it on one CSV field
  std::string msg = r.failure;
  for (auto& c : msg)
    if (c == ',' || c == '\n' || c == '"') c = ';';
  os << msg;
  return os.str();
}

void export_report(const RunReport& r, const std::string& out_dir, bool with_event_log) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir + ": " + ec.message());

  {
    const auto p = dir / "summary.csv";
    auto f = open_out(p);
    f << summary_header() << '\n' << summary_row(r) << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "becn_ts.csv";
    auto f = open_out(p);
    f << "bin_start_ns,becn_count\n";
    for (std::size_t i = 0; i < r.becn_ts.size(); ++i)
      f << static_cast<SimTime>(i) * r.bin_width / kNanosecond << ',' << r.becn_ts[i] << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "throughput_ts.csv";
    auto f = open_out(p);
    f << "bin_start_ns,delivered_bytes,gbps\n";
    const double bin_s = static_cast<double>(r.bin_width) / 1e12;
    for (std::size_t i = 0; i < r.delivered_bytes_ts.size(); ++i)
      f << static_cast<SimTime>(i) * r.bin_width / kNanosecond << ',' << r.delivered_bytes_ts[i] << ','
        << fmt_double(static_cast<double>(r.delivered_bytes_ts[i]) * 8.0 / bin_s / 1e9) << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "occupancy_ts.csv";
    auto f = open_out(p);
    f << "bin_start_ns,buffered_packets_peak,cft_entries_peak\n";
    for (std::size_t i = 0; i < r.buffered_peak_ts.size(); ++i)
      f << static_cast<SimTime>(i) * r.bin_width / kNanosecond << ',' << r.buffered_peak_ts[i] << ','
        << r.cft_entries_peak_ts[i] << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "fct.csv";
    auto f = open_out(p);
    f << "msg_id,size_bytes,inject_ns,complete_ns,fct_ns\n";
    for (const auto& m : r.fct)
      f << m.msg_id << ',' << m.size << ',' << fmt_double(static_cast<double>(m.inject) / kNanosecond)
        << ',' << fmt_double(static_cast<double>(m.complete) / kNanosecond) << ','
        << fmt_double(static_cast<double>(m.fct()) / kNanosecond) << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "pfc_events.csv";
    auto f = open_out(p);
    f << "time_ns,switch,in_port,vl,frame\n";
    for (const auto& e : r.pfc_events)
      f << fmt_double(static_cast<double>(e.time) / kNanosecond) << ',' << e.node << ',' << e.port << ','
        << e.vl << ',' << (e.pause ? "pause" : "resume") << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "becn_events.csv";
    auto f = open_out(p);
    f << "time_ns,src_node,dst_node,src_port,dst_port,hops\n";
    for (const auto& e : r.becn_events)
      f << fmt_double(static_cast<double>(e.time) / kNanosecond) << ',' << fmt_flow(e.flow) << ','
        << e.hops << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "cft_events.csv";
    auto f = open_out(p);
    f << "time_ns,switch,port,side,event,src_node,dst_node,src_port,dst_port\n";
    for (const auto& e : r.cft_events)
      f << fmt_double(static_cast<double>(e.time) / kNanosecond) << ',' << e.switch_id << ',' << e.port
        << ',' << (e.ingress_side ? "ingress" : "egress") << ',' << cft_kind(e.kind) << ','
        << fmt_flow(e.key) << '\n';
    close_checked(f, p);
  }
  {
    const auto p = dir / "mode_events.csv";
    auto f = open_out(p);
    f << "time_ns,switch,port,from,to,cause\n";
    for (const auto& e : r.mode_events)
      f << fmt_double(static_cast<double>(e.transition.time) / kNanosecond) << ',' << e.switch_id << ','
        << e.port << ',' << to_string(e.transition.from) << ',' << to_string(e.transition.to) << ','
        << to_string(e.transition.cause) << '\n';
    close_checked(f, p);
  }
  if (with_event_log) {
    const auto p = dir / "events.log";
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << "# icisim events v1\n";
    f << "dispatched " << r.events_dispatched << " digest " << std::hex << r.trace_digest << std::dec << '\n';
    for (const auto& e : r.mode_events)
      f << e.transition.time << " mode sw" << e.switch_id << ":" << e.port << ' '
        << to_string(e.transition.from) << "->" << to_string(e.transition.to) << '\n';
    close_checked(f, p);
  }
}

}  // namespace ici
