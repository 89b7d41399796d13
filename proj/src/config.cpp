#include "ici/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ici {

using nlohmann::json;

const char* to_string(CcMode m) {
  switch (m) {
    case CcMode::kNone: return "none";
    case CcMode::kDcqcn: return "dcqcn";
    case CcMode::kCi: return "ci";
    case CcMode::kCiDcqcnNaive: return "ci+dcqcn-naive";
    case CcMode::kIci: return "ici";
  }
  return "?";
}

CcMode parse_cc_mode(const std::string& s) {
  for (auto m : {CcMode::kNone, CcMode::kDcqcn, CcMode::kCi, CcMode::kCiDcqcnNaive, CcMode::kIci})
    if (s == to_string(m)) return m;
  throw ConfigError("cc_mode: unknown value '" + s + "' (none, dcqcn, ci, ci+dcqcn-naive, ici)");
}

const std::vector<CcMode>& all_cc_modes() {
  static const std::vector<CcMode> modes{CcMode::kNone, CcMode::kDcqcn, CcMode::kCi,
                                         CcMode::kCiDcqcnNaive, CcMode::kIci};
  return modes;
}

bool uses_ci(CcMode m) { return m == CcMode::kCi || m == CcMode::kCiDcqcnNaive || m == CcMode::kIci; }
bool uses_dcqcn(CcMode m) { return m == CcMode::kDcqcn || m == CcMode::kCiDcqcnNaive || m == CcMode::kIci; }

SwitchConfig ScenarioConfig::switch_config() const {
  SwitchConfig s;
  s.vl_count = vl_count;
  s.port_partition = port_partition;
  s.egress_cap = egress_cap;
  s.speedup = speedup;
  s.pfc = pfc;
  s.ci = ci;
  s.ci.enabled = uses_ci(cc_mode);
  switch (cc_mode) {
    case CcMode::kNone:
    case CcMode::kCi: s.marking = MarkingPolicy::kNone; break;
    case CcMode::kDcqcn:
    case CcMode::kCiDcqcnNaive: s.marking = MarkingPolicy::kPlain; break;
    case CcMode::kIci: s.marking = MarkingPolicy::kCoordinated; break;
  }
  s.ecn = ecn;
  s.coordinator = ici;
  s.audit = audit;
  return s;
}

NicConfig ScenarioConfig::nic_config() const {
  NicConfig n;
  n.vl_count = vl_count;
  n.link_rate = topology.link_rate;
  n.dcqcn_enabled = uses_dcqcn(cc_mode);
  n.dcqcn = dcqcn;
  n.dcqcn.link_rate = static_cast<double>(topology.link_rate);
  return n;
}

std::uint32_t ScenarioConfig::root_count() const {
  std::uint32_t r = 0;
  for (const auto& w : workloads)
    if (w.kind == WorkloadKind::kIncastTree) r = std::max(r, w.roots);
  return r;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError(key + ": " + why);
}

void validate_workload(const WorkloadSpec& w, std::size_t i, std::uint32_t vl_count) {
  const std::string k = "workloads[" + std::to_string(i) + "]";
  if (w.vl >= vl_count) bad(k + ".vl", "must be below switch.vl_count");
  if (w.start < 0) bad(k + ".start_us", "must be >= 0");
  switch (w.kind) {
    case WorkloadKind::kUniform:
      if (!(w.rate > 0 && w.rate <= 1)) bad(k + ".rate", "must be in (0, 1]");
      if (w.duration <= 0) bad(k + ".duration_us", "must be positive");
      break;
    case WorkloadKind::kIncastTree:
      if (!(w.rate > 0 && w.rate <= 1)) bad(k + ".rate", "must be in (0, 1]");
      if (w.roots == 0) bad(k + ".roots", "must be >= 1");
      if (w.bursts == 0) bad(k + ".bursts", "must be >= 1");
      if (w.burst_size == 0 && w.duration <= 0) bad(k + ".duration_us", "must be positive");
      if (w.bursts > 1 && w.burst_size == 0) bad(k + ".burst_size", "required when bursts > 1");
      if (w.stagger < 0) bad(k + ".stagger_us", "must be >= 0");
      break;
    case WorkloadKind::kMessageMix:
      if (!(w.load > 0 && w.load <= 1)) bad(k + ".load", "must be in (0, 1]");
      if (w.messages == 0) bad(k + ".messages", "must be >= 1");
      if (w.cdf_path.empty()) bad(k + ".cdf", "a flow-size CDF file is required");
      break;
    case WorkloadKind::kTrace:
      if (w.trace_path.empty()) bad(k + ".trace", "a trace file is required");
      if (!(w.dilation > 0)) bad(k + ".dilation", "must be positive");
      break;
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  const auto topo = build_min(topology);
  if (vl_count == 0 || vl_count > 8) bad("switch.vl_count", "must be in [1, 8]");
  if (!(speedup >= 1.0 && speedup <= 8.0)) bad("switch.speedup", "must be in [1, 8]");
  if (egress_cap < kMtuBytes) bad("switch.egress_cap_kb", "must hold at least one MTU");
  if (port_partition < egress_cap) bad("switch.port_partition_kb", "must be >= egress_cap_kb");
  resolve_thresholds(pfc, vl_count);
  if (static_cast<std::uint64_t>(pfc.port_budget) * kMtuBytes > port_partition)
    bad("pfc.port_budget", "exceeds the per-port buffer partition");
  ecn.validate(static_cast<double>(egress_cap / kMtuBytes));
  auto d = dcqcn;
  d.link_rate = static_cast<double>(topology.link_rate);
  d.validate();
  if (uses_ci(cc_mode)) {
    if (ci.capacity < 1) bad("ci.cft_capacity", std::string("must be >= 1 when cc_mode is ") + to_string(cc_mode));
    if (ci.detection_threshold < 1 || ci.detection_threshold > egress_cap / kMtuBytes)
      bad("ci.detection_threshold", "must be in [1, egress capacity in packets]");
    if (ci.residency <= 0) bad("ci.residency_us", "must be positive");
    if (ci.cfq_entry_packets < 1) bad("ci.cfq_entry_packets", "must be >= 1");
    if (ci.candidate_min_packets < 1) bad("ci.candidate_min_packets", "must be >= 1");
    if (!(ci.candidate_min_share >= 0 && ci.candidate_min_share <= 1)) bad("ci.candidate_min_share", "must be in [0, 1]");
  }
  if (ici.persistence_window <= 0) bad("ici.persistence_window_us", "must be positive");
  if (ici.overflow_capacity < 1) bad("ici.overflow_capacity", "must be >= 1");
  if (!(incast_fraction >= 0 && incast_fraction < 1)) bad("roles.incast_fraction", "must be in [0, 1)");
  const auto senders = static_cast<std::uint32_t>(std::lround(topo.terminals() * incast_fraction));
  if (senders + root_count() > topo.terminals()) bad("roles.incast_fraction", "leaves too few nodes for the incast roots");
  for (std::size_t i = 0; i < workloads.size(); ++i) validate_workload(workloads[i], i, vl_count);
  if (bin_width <= 0) bad("metrics.bin_width_us", "must be positive");
  if (sample_period <= 0) bad("metrics.sample_period_us", "must be positive");
  if (max_time <= 0) bad("max_time_ms", "must be positive");
}

std::vector<WorkloadSpec> preset_workloads(const std::string& preset) {
  WorkloadSpec uniform;
  uniform.kind = WorkloadKind::kUniform;
  uniform.rate = 0.4;
  uniform.start = 0;
  uniform.duration = 3 * kMillisecond;

  WorkloadSpec tree;
  tree.kind = WorkloadKind::kIncastTree;
  tree.rate = 1.0;
  tree.start = 500 * kMicrosecond;
  tree.duration = kMillisecond;
  tree.roots = 1;

  WorkloadSpec mix;
  mix.kind = WorkloadKind::kMessageMix;
  mix.load = 0.5;
  mix.messages = 50000;
  mix.cdf_path = "google_all_placeholder.cdf";

  if (preset == "one_tree") return {uniform, tree};
  if (preset == "four_tree") {
    tree.roots = 4;
    return {uniform, tree};
  }
  tree.start = kMillisecond;
  if (preset == "google_one_tree") return {mix, tree};
  if (preset == "google_one_tree_burst") {
    tree.burst_size = 1000;
    return {mix, tree};
  }
  if (preset == "google_four_burst") {
    tree.roots = 4;
    tree.burst_size = 200;
    tree.bursts = 4;
    tree.stagger = 250 * kMicrosecond;
    return {mix, tree};
  }
  throw ConfigError("preset: unknown scenario '" + preset + "'");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"one_tree", "four_tree", "google_one_tree",
                                              "google_one_tree_burst", "google_four_burst"};
  return names;
}

namespace {

SimTime from_us(double us) { return static_cast<SimTime>(std::llround(us * kMicrosecond)); }
double to_us_d(SimTime t) { return static_cast<double>(t) / kMicrosecond; }

// Reads keys from one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "must be an object");
  }

  template <typename T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
        out = it->template get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
        const auto v = it->template get<long long>();
        if (v < 0 && std::is_unsigned_v<T>) throw std::invalid_argument("must be >= 0");
        out = static_cast<T>(v);
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
        out = it->template get<T>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("expected a string");
        out = it->template get<std::string>();
      } else {
        out = it->template get<T>();
      }
    } catch (const std::invalid_argument& e) {
      bad(name(key), e.what());
    } catch (const json::exception& e) {
      bad(name(key), e.what());
    }
    return true;
  }

  bool get_us(const char* key, SimTime& out) {
    double v = 0;
    if (!get(key, v)) return false;
    out = from_us(v);
    return true;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) bad(name(it.key().c_str()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

WorkloadKind parse_kind(const std::string& s, const std::string& key) {
  for (auto k : {WorkloadKind::kUniform, WorkloadKind::kIncastTree, WorkloadKind::kMessageMix, WorkloadKind::kTrace})
    if (s == to_string(k)) return k;
  bad(key, "unknown workload kind '" + s + "' (uniform, incast, message_mix, trace)");
}

WorkloadSpec parse_workload(const json& j, const std::string& path) {
  Section s(j, path);
  WorkloadSpec w;
  std::string kind;
  if (!s.get("kind", kind)) bad(path + ".kind", "required");
  w.kind = parse_kind(kind, path + ".kind");
  s.get("rate", w.rate);
  s.get("load", w.load);
  s.get_us("start_us", w.start);
  s.get_us("duration_us", w.duration);
  s.get("roots", w.roots);
  s.get("burst_size", w.burst_size);
  s.get("bursts", w.bursts);
  s.get_us("stagger_us", w.stagger);
  s.get("messages", w.messages);
  s.get("cdf", w.cdf_path);
  s.get("trace", w.trace_path);
  s.get("dilation", w.dilation);
  s.get("vl", w.vl);
  s.finish();
  return w;
}

json workload_json(const WorkloadSpec& w) {
  json j;
  j["kind"] = to_string(w.kind);
  j["rate"] = w.rate;
  j["load"] = w.load;
  j["start_us"] = to_us_d(w.start);
  j["duration_us"] = to_us_d(w.duration);
  j["roots"] = w.roots;
  j["burst_size"] = w.burst_size;
  j["bursts"] = w.bursts;
  j["stagger_us"] = to_us_d(w.stagger);
  j["messages"] = w.messages;
  j["cdf"] = w.cdf_path;
  j["trace"] = w.trace_path;
  j["dilation"] = w.dilation;
  j["vl"] = w.vl;
  return j;
}

std::string key_mode_name(CftKeyMode m) { return m == CftKeyMode::kExactTuple ? "exact" : "destination"; }

void resolve_paths(ScenarioConfig& cfg, const std::filesystem::path& base) {
  namespace fs = std::filesystem;
  auto fix = [&](std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return;
    if (!base.empty() && fs::exists(base / p)) {
      p = fs::weakly_canonical(base / p).string();
      return;
    }
    const fs::path data(ICISIM_DATA_DIR);
    if (fs::exists(data / p)) p = (data / p).string();
  };
  for (auto& w : cfg.workloads) {
    fix(w.cdf_path);
    fix(w.trace_path);
  }
}

ScenarioConfig parse_json(const json& root, const std::filesystem::path& base) {
  ScenarioConfig cfg;
  if (root.is_null()) {
    resolve_paths(cfg, base);
    cfg.validate();
    return cfg;
  }
  Section top(root, "");
  std::string preset;
  if (top.get("preset", preset)) {
    cfg.workloads = preset_workloads(preset);
    cfg.name = preset;
  }
  top.get("name", cfg.name);
  std::string mode;
  if (top.get("cc_mode", mode)) cfg.cc_mode = parse_cc_mode(mode);
  top.get("seed", cfg.seed);

  if (const auto* j = top.child("topology")) {
    Section s(*j, "topology");
    s.get("radix", cfg.topology.radix);
    s.get("terminals", cfg.topology.terminals);
    s.get("oversubscription", cfg.topology.oversubscription);
    double gbps = static_cast<double>(cfg.topology.link_rate) / kGbps;
    if (s.get("link_rate_gbps", gbps)) {
      if (!(gbps > 0)) bad("topology.link_rate_gbps", "must be positive");
      cfg.topology.link_rate = static_cast<BitsPerSecond>(std::llround(gbps * kGbps));
    }
    double delay_ns = static_cast<double>(cfg.topology.link_delay) / kNanosecond;
    if (s.get("link_delay_ns", delay_ns)) cfg.topology.link_delay = static_cast<SimTime>(std::llround(delay_ns * kNanosecond));
    s.finish();
  }
  if (const auto* j = top.child("switch")) {
    Section s(*j, "switch");
    s.get("vl_count", cfg.vl_count);
    s.get("speedup", cfg.speedup);
    std::uint64_t kb = cfg.port_partition / 1024;
    if (s.get("port_partition_kb", kb)) cfg.port_partition = kb * 1024;
    kb = cfg.egress_cap / 1024;
    if (s.get("egress_cap_kb", kb)) cfg.egress_cap = kb * 1024;
    s.finish();
  }
  if (const auto* j = top.child("pfc")) {
    Section s(*j, "pfc");
    s.get("enabled", cfg.pfc.enabled);
    s.get("stop", cfg.pfc.stop);
    s.get("go", cfg.pfc.go);
    s.get("headroom", cfg.pfc.headroom);
    s.get("port_budget", cfg.pfc.port_budget);
    if (const auto* v = s.child("per_vl_stop")) {
      if (!v->is_array()) bad("pfc.per_vl_stop", "must be an array of integers");
      cfg.pfc.per_vl_stop.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer() || e.get<long long>() < 0) bad("pfc.per_vl_stop", "must be an array of integers");
        cfg.pfc.per_vl_stop.push_back(e.get<std::uint32_t>());
      }
    }
    s.finish();
    if (!cfg.pfc.enabled) bad("pfc.enabled", "the network model is lossless; PFC cannot be disabled");
  }
  if (cfg.vl_count == 2 && cfg.pfc.per_vl_stop.empty()) cfg.pfc.per_vl_stop = {22, 17};
  if (const auto* j = top.child("ecn")) {
    Section s(*j, "ecn");
    s.get("k_min", cfg.ecn.k_min);
    s.get("k_max", cfg.ecn.k_max);
    s.get("p_max", cfg.ecn.p_max);
    s.finish();
  }
  if (const auto* j = top.child("dcqcn")) {
    Section s(*j, "dcqcn");
    s.get("g", cfg.dcqcn.g);
    s.get_us("notification_window_us", cfg.dcqcn.notification_window);
    s.get_us("alpha_timer_us", cfg.dcqcn.alpha_timer);
    s.get_us("increase_timer_us", cfg.dcqcn.increase_timer);
    s.get("byte_counter", cfg.dcqcn.byte_counter);
    s.get("fast_recovery_stages", cfg.dcqcn.fast_recovery_stages);
    double g = cfg.dcqcn.rate_ai / 1e9;
    if (s.get("rate_ai_gbps", g)) cfg.dcqcn.rate_ai = g * 1e9;
    g = cfg.dcqcn.min_rate / 1e9;
    if (s.get("min_rate_gbps", g)) cfg.dcqcn.min_rate = g * 1e9;
    s.finish();
  }
  if (const auto* j = top.child("ci")) {
    Section s(*j, "ci");
    std::string km;
    if (s.get("key_mode", km)) {
      if (km == "destination") cfg.ci.key_mode = CftKeyMode::kDestination;
      else if (km == "exact") cfg.ci.key_mode = CftKeyMode::kExactTuple;
      else bad("ci.key_mode", "must be 'destination' or 'exact'");
    }
    if (const auto* c = s.child("cft_capacity")) {
      if (c->is_string() && c->get<std::string>() == "unbounded") cfg.ci.capacity = kUnboundedCapacity;
      else if (c->is_number_integer() && c->get<long long>() >= 0) cfg.ci.capacity = c->get<std::size_t>();
      else bad("ci.cft_capacity", "must be a non-negative integer or \"unbounded\"");
    }
    s.get("detection_threshold", cfg.ci.detection_threshold);
    s.get_us("residency_us", cfg.ci.residency);
    s.get("candidate_min_packets", cfg.ci.candidate_min_packets);
    s.get("candidate_min_share", cfg.ci.candidate_min_share);
    s.get("cfq_entry_packets", cfg.ci.cfq_entry_packets);
    s.get("mirror_ingress", cfg.ci.mirror_ingress);
    s.get("detect_at_branches", cfg.ci.detect_at_branches);
    s.finish();
  }
  if (const auto* j = top.child("ici")) {
    Section s(*j, "ici");
    s.get_us("persistence_window_us", cfg.ici.persistence_window);
    s.get("mark_cft_entries_when_delegating", cfg.ici.mark_cft_entries_when_delegating);
    s.get("overflow_capacity", cfg.ici.overflow_capacity);
    s.get("quiescent_marking", cfg.ici.quiescent_marking);
    s.get("escalate_on_saturated_cfq", cfg.ici.escalate_on_saturated_cfq);
    s.finish();
  }
  if (const auto* j = top.child("roles")) {
    Section s(*j, "roles");
    s.get("incast_fraction", cfg.incast_fraction);
    s.finish();
  }
  if (const auto* j = top.child("workloads")) {
    if (!j->is_array()) bad("workloads", "must be an array");
    cfg.workloads.clear();
    for (std::size_t i = 0; i < j->size(); ++i)
      cfg.workloads.push_back(parse_workload((*j)[i], "workloads[" + std::to_string(i) + "]"));
  }
  if (const auto* j = top.child("metrics")) {
    Section s(*j, "metrics");
    s.get_us("bin_width_us", cfg.bin_width);
    s.get_us("sample_period_us", cfg.sample_period);
    s.get("event_log", cfg.event_log);
    s.finish();
  }
  double max_ms = static_cast<double>(cfg.max_time) / kMillisecond;
  if (top.get("max_time_ms", max_ms)) cfg.max_time = static_cast<SimTime>(std::llround(max_ms * kMillisecond));
  top.get("audit", cfg.audit);
  top.finish();

  resolve_paths(cfg, base);
  cfg.validate();
  return cfg;
}

json parse_text(const std::string& text, const std::string& origin) {
  bool blank = true;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  if (blank) return json();
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
  return parse_json(parse_text(text, origin), {});
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const auto base = std::filesystem::path(path).parent_path();
  try {
    return parse_json(parse_text(ss.str(), path), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string effective_config_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["cc_mode"] = to_string(c.cc_mode);
  j["seed"] = c.seed;
  j["topology"] = {{"radix", c.topology.radix},
                   {"terminals", c.topology.terminals},
                   {"oversubscription", c.topology.oversubscription},
                   {"link_rate_gbps", static_cast<double>(c.topology.link_rate) / kGbps},
                   {"link_delay_ns", static_cast<double>(c.topology.link_delay) / kNanosecond}};
  j["switch"] = {{"vl_count", c.vl_count},
                 {"speedup", c.speedup},
                 {"port_partition_kb", c.port_partition / 1024},
                 {"egress_cap_kb", c.egress_cap / 1024}};
  j["pfc"] = {{"enabled", c.pfc.enabled},   {"stop", c.pfc.stop},
              {"go", c.pfc.go},             {"headroom", c.pfc.headroom},
              {"port_budget", c.pfc.port_budget}, {"per_vl_stop", c.pfc.per_vl_stop}};
  j["ecn"] = {{"k_min", c.ecn.k_min}, {"k_max", c.ecn.k_max}, {"p_max", c.ecn.p_max}};
  j["dcqcn"] = {{"g", c.dcqcn.g},
                {"notification_window_us", to_us_d(c.dcqcn.notification_window)},
                {"alpha_timer_us", to_us_d(c.dcqcn.alpha_timer)},
                {"increase_timer_us", to_us_d(c.dcqcn.increase_timer)},
                {"byte_counter", c.dcqcn.byte_counter},
                {"fast_recovery_stages", c.dcqcn.fast_recovery_stages},
                {"rate_ai_gbps", c.dcqcn.rate_ai / 1e9},
                {"min_rate_gbps", c.dcqcn.min_rate / 1e9}};
  json ci = {{"key_mode", key_mode_name(c.ci.key_mode)},
             {"detection_threshold", c.ci.detection_threshold},
             {"residency_us", to_us_d(c.ci.residency)},
             {"candidate_min_packets", c.ci.candidate_min_packets},
             {"candidate_min_share", c.ci.candidate_min_share},
             {"cfq_entry_packets", c.ci.cfq_entry_packets},
             {"mirror_ingress", c.ci.mirror_ingress},
             {"detect_at_branches", c.ci.detect_at_branches}};
  if (c.ci.capacity == kUnboundedCapacity) ci["cft_capacity"] = "unbounded";
  else ci["cft_capacity"] = c.ci.capacity;
  j["ci"] = ci;
  j["ici"] = {{"persistence_window_us", to_us_d(c.ici.persistence_window)},
              {"mark_cft_entries_when_delegating", c.ici.mark_cft_entries_when_delegating},
              {"overflow_capacity", c.ici.overflow_capacity},
              {"quiescent_marking", c.ici.quiescent_marking},
              {"escalate_on_saturated_cfq", c.ici.escalate_on_saturated_cfq}};
  j["roles"] = {{"incast_fraction", c.incast_fraction}};
  j["workloads"] = json::array();
  for (const auto& w : c.workloads) j["workloads"].push_back(workload_json(w));
  j["metrics"] = {{"bin_width_us", to_us_d(c.bin_width)},
                  {"sample_period_us", to_us_d(c.sample_period)},
                  {"event_log", c.event_log}};
  j["max_time_ms"] = static_cast<double>(c.max_time) / kMillisecond;
  j["audit"] = c.audit;
  return j.dump(2) + "\n";
}

}  // namespace ici
